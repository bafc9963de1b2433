#!/usr/bin/env python3
"""
M-特征值求解 - 多起点交替块上升、谱范数区间与半正定分类

对单位向量 (x, y) 最大化四次型 f(x, y) = <A, x∘y∘x∘y>。固定 y 时 f 是 x 的二次型
x^T G(y) x，固定 x 时是 y 的二次型 y^T H(x) y，因此每半步取移位后矩阵的最大特征向量
即可保证目标单调不减。全局最优性不作保证：返回值是最大 M-特征值的下包络估计。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import ConvergenceFailure, DimensionMismatch
from src.core.tensor import (
    BiquadraticTensor,
    Tensor4,
    ThirdOrderTensor,
    contract_third_order,
    flatten_square,
    frobenius,
    quartic_form,
    random_unit,
    sign_normalize,
)
from src.kernels.dense import matrix_spectral_norm, symeig
from src.norms.interval import NormInterval

logger = logging.getLogger(__name__)

PSD_TOL = 1e-10

CERTIFIED_PSD = "CertifiedPSD"
NOT_PSD = "NotPSD"
UNKNOWN = "Unknown"


class SolverConfig(BaseModel):
    """多起点求解器参数"""
    model_config = ConfigDict(frozen=True)

    starts: int = Field(default=32, gt=0)
    max_iters: int = Field(default=2000, gt=0)
    tol: float = Field(default=1e-11, gt=0)
    shift: Optional[float] = Field(default=None, ge=0)  # None 表示自动取 m*n*max|a|
    seed: int = Field(default=0, ge=0, lt=2 ** 64)


@dataclass(frozen=True)
class MEigenPair:
    lam: float
    x: np.ndarray
    y: np.ndarray
    residual: float
    iterations: int = 0
    trace: Tuple[float, ...] = field(default=(), repr=False)
    converged: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": float(self.lam),
            "x": [float(v) for v in self.x],
            "y": [float(v) for v in self.y],
            "residual": float(self.residual),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "source": "m-eigen-search",
        }


@dataclass(frozen=True)
class PsdVerdict:
    tag: str
    min_estimate: float
    matrix_min_eigenvalue: float
    positive_definite: bool = False
    witness: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tag": self.tag,
            "min_estimate": float(self.min_estimate),
            "matrix_min_eigenvalue": float(self.matrix_min_eigenvalue),
            "positive_definite": bool(self.positive_definite),
            "witness": self.witness,
            "min_source": "m-eigen-search",
            "certificate_source": "matrix-min-eigenvalue",
        }


@dataclass(frozen=True)
class EllipticityReport:
    """强椭圆性判定：certified / violated / unverified"""
    status: str
    min_estimate: float
    matrix_min_eigenvalue: float
    witness: Optional[Dict[str, Any]] = None

    @property
    def strongly_elliptic(self) -> Optional[bool]:
        return {"certified": True, "violated": False}.get(self.status)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "min_estimate": float(self.min_estimate),
            "matrix_min_eigenvalue": float(self.matrix_min_eigenvalue),
            "witness": self.witness,
        }


# ==================== 偏缩并矩阵与残差 ====================

def contracted_matrix_y(A: Tensor4, y: Any) -> np.ndarray:
    """G(y)[i1][i2] = Σ a[i1][j1][i2][j2] y[j1] y[j2]"""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != A.n:
        raise DimensionMismatch(f"y 长度应为 {A.n}，实际为 {y.size}")
    return np.einsum("ijkl,j,l->ik", A.entries, y, y)


def contracted_matrix_x(A: Tensor4, x: Any) -> np.ndarray:
    """H(x)[j1][j2] = Σ a[i1][j1][i2][j2] x[i1] x[i2]"""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != A.m:
        raise DimensionMismatch(f"x 长度应为 {A.m}，实际为 {x.size}")
    return np.einsum("ijkl,i,k->jl", A.entries, x, x)


def m_residual(A: Tensor4, lam: float, x: Any, y: Any) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    rx = np.linalg.norm(contracted_matrix_y(A, y) @ x - lam * x)
    ry = np.linalg.norm(contracted_matrix_x(A, x) @ y - lam * y)
    return float(max(rx, ry, abs(np.linalg.norm(x) - 1.0), abs(np.linalg.norm(y) - 1.0)))


# ==================== 交替块上升 ====================

def _auto_shift(A: Tensor4, config: SolverConfig) -> float:
    if config.shift is not None:
        return float(config.shift)
    return float(A.m * A.n * np.max(np.abs(A.entries)))


def _top_eigenvector(S: np.ndarray, shift: float, previous: np.ndarray) -> np.ndarray:
    decomposition = symeig(S + shift * np.eye(S.shape[0]))
    v = decomposition.vectors[:, int(np.argmax(decomposition.values))]
    v = v / np.linalg.norm(v)
    # 与上一迭代保持同向，避免符号来回翻转
    return -v if v @ previous < 0 else v


def _canonical_pair(A: Tensor4) -> MEigenPair:
    x = np.zeros(A.m)
    y = np.zeros(A.n)
    x[0] = y[0] = 1.0
    return MEigenPair(lam=0.0, x=x, y=y, residual=0.0, iterations=0)


def alternating_maximize(A: Tensor4, config: Optional[SolverConfig] = None,
                         x0: Optional[np.ndarray] = None,
                         y0: Optional[np.ndarray] = None) -> MEigenPair:
    """从 (x0, y0) 出发交替更新 x、y，直到 M-特征方程残差足够小"""
    config = config or SolverConfig()
    scale = frobenius(A)
    if scale == 0.0:
        return _canonical_pair(A)

    if x0 is None or y0 is None:
        rng = np.random.default_rng(config.seed)
        x0 = random_unit(A.m, rng) if x0 is None else x0
        y0 = random_unit(A.n, rng) if y0 is None else y0
    x = np.asarray(x0, dtype=float) / np.linalg.norm(x0)
    y = np.asarray(y0, dtype=float) / np.linalg.norm(y0)

    shift = _auto_shift(A, config)
    threshold = config.tol * max(1.0, scale)
    trace: List[float] = [quartic_form(A, x, y)]
    residual = m_residual(A, trace[-1], x, y)

    iterations = 0
    while residual > threshold and iterations < config.max_iters:
        iterations += 1
        try:
            x = _top_eigenvector(contracted_matrix_y(A, y), shift, x)
            trace.append(quartic_form(A, x, y))
            y = _top_eigenvector(contracted_matrix_x(A, x), shift, y)
            trace.append(quartic_form(A, x, y))
        except ConvergenceFailure as e:
            # best 始终是 MEigenPair
            lam = quartic_form(A, x, y)
            current = MEigenPair(lam=lam, x=x, y=y, residual=m_residual(A, lam, x, y),
                                 iterations=iterations, trace=tuple(trace), converged=False)
            raise ConvergenceFailure(f"交替上升第 {iterations} 次迭代的特征分解失败: {e}",
                                     best=current) from e
        residual = m_residual(A, trace[-1], x, y)

    pair = MEigenPair(lam=trace[-1], x=x, y=y, residual=residual,
                      iterations=iterations, trace=tuple(trace),
                      converged=residual <= threshold)
    if not pair.converged:
        raise ConvergenceFailure(
            f"交替上升在 {config.max_iters} 次迭代后未收敛，残差 {residual:.3g}", best=pair
        )
    logger.debug(f"起点收敛: λ={pair.lam:.12g}, 迭代 {iterations} 次, 残差 {residual:.2e}")
    return pair


def _tie_key(pair: MEigenPair) -> Tuple[float, ...]:
    x, _ = sign_normalize(pair.x)
    y, _ = sign_normalize(pair.y)
    return tuple(np.concatenate([x, y]))


def _reduce(pairs: List[MEigenPair], tol: float) -> MEigenPair:
    """与起点顺序无关的归约：λ 最大者胜出，λ 相差在 tol 内时取字典序更小的规范化 (x, y)"""
    best_lam = max(p.lam for p in pairs)
    tied = [p for p in pairs if p.lam >= best_lam - tol]
    winner = min(tied, key=_tie_key)
    x, _ = sign_normalize(winner.x)
    y, _ = sign_normalize(winner.y)
    return MEigenPair(lam=winner.lam, x=x, y=y, residual=winner.residual,
                      iterations=winner.iterations, trace=winner.trace,
                      converged=winner.converged)


def largest_m_eigenvalue(A: Tensor4, config: Optional[SolverConfig] = None) -> MEigenPair:
    """多起点搜索最大 M-特征值，每个起点使用由种子派生的独立随机流"""
    config = config or SolverConfig()
    scale = frobenius(A)
    if scale == 0.0:
        return _canonical_pair(A)

    converged: List[MEigenPair] = []
    stalled: List[MEigenPair] = []
    for child in np.random.SeedSequence(config.seed).spawn(config.starts):
        rng = np.random.default_rng(child)
        x0 = random_unit(A.m, rng)
        y0 = random_unit(A.n, rng)
        try:
            converged.append(alternating_maximize(A, config, x0, y0))
        except ConvergenceFailure as e:
            stalled.append(e.best)

    if stalled:
        logger.warning(f"⚠️ {len(stalled)}/{config.starts} 个起点未收敛")
    if not converged:
        candidates = [p for p in stalled if isinstance(p, MEigenPair)]
        best = _reduce(candidates, config.tol * max(1.0, scale)) if candidates else None
        raise ConvergenceFailure("所有起点均未收敛", best=best)

    result = _reduce(converged, config.tol * max(1.0, scale))
    logger.debug(f"最大 M-特征值估计: {result.lam:.12g} ({len(converged)} 个起点收敛)")
    return result


def smallest_m_eigenvalue(A: Tensor4, config: Optional[SolverConfig] = None) -> MEigenPair:
    """最小 M-特征值 = -(−A 的最大 M-特征值)"""
    pair = largest_m_eigenvalue(-A, config)
    return MEigenPair(lam=-pair.lam, x=pair.x, y=pair.y, residual=pair.residual,
                      iterations=pair.iterations, trace=tuple(-v for v in pair.trace),
                      converged=pair.converged)


# ==================== 范数区间与分类 ====================

def spectral_norm_interval(A: Tensor4, config: Optional[SolverConfig] = None) -> NormInterval:
    """下界来自 M-特征值搜索（谱范数等于 M-特征值绝对值的最大者），上界为 ||M(A)||_S"""
    upper = matrix_spectral_norm(flatten_square(A))
    if upper == 0.0:
        return NormInterval(0.0, 0.0, "m-eigen-search", "matrix-spectral", exact=True)
    largest = largest_m_eigenvalue(A, config)
    smallest = smallest_m_eigenvalue(A, config)
    lower = max(abs(largest.lam), abs(smallest.lam))
    return NormInterval(lower, upper, "m-eigen-search", "matrix-spectral")


def _matrix_min_eigenvalue(A: Tensor4) -> float:
    return float(np.min(symeig(flatten_square(A)).values))


def psd_classify(A: Tensor4, config: Optional[SolverConfig] = None) -> PsdVerdict:
    """
    半正定分类：
      - M(A) 最小特征值 >= -tol*||A||_F 时四次型 (x⊗y)^T M (x⊗y) 必非负，给出 CertifiedPSD
      - 搜索到四次型 < -tol*||A||_F 的点时给出 NotPSD 及见证
      - 否则 Unknown
    """
    scale = frobenius(A)
    if scale == 0.0:
        return PsdVerdict(tag=CERTIFIED_PSD, min_estimate=0.0, matrix_min_eigenvalue=0.0)

    threshold = PSD_TOL * scale
    matrix_min = _matrix_min_eigenvalue(A)
    smallest = smallest_m_eigenvalue(A, config)
    positive_definite = matrix_min > threshold

    if matrix_min >= -threshold:
        tag, witness = CERTIFIED_PSD, None
    elif smallest.lam < -threshold:
        tag = NOT_PSD
        witness = {"x": [float(v) for v in smallest.x],
                   "y": [float(v) for v in smallest.y],
                   "value": float(quartic_form(A, smallest.x, smallest.y))}
    else:
        tag, witness = UNKNOWN, None

    logger.info(f"半正定分类: {tag} (λmin(M)={matrix_min:.6g}, 最小 M-特征值估计={smallest.lam:.6g})")
    return PsdVerdict(tag=tag, min_estimate=smallest.lam, matrix_min_eigenvalue=matrix_min,
                      positive_definite=positive_definite, witness=witness)


def strong_ellipticity(A: Tensor4, config: Optional[SolverConfig] = None) -> EllipticityReport:
    """
    强椭圆性：四次型在单位球面乘积上处处为正
      - certified: M(A) 正定
      - violated: 找到四次型 <= tol*||A||_F 的点
      - unverified: 搜索未发现反例，但 M(A) 不正定
    """
    scale = frobenius(A)
    if scale == 0.0:
        x = np.eye(A.m)[0]
        y = np.eye(A.n)[0]
        return EllipticityReport("violated", 0.0, 0.0,
                                 {"x": x.tolist(), "y": y.tolist(), "value": 0.0})

    threshold = PSD_TOL * scale
    matrix_min = _matrix_min_eigenvalue(A)
    smallest = smallest_m_eigenvalue(A, config)

    if matrix_min > threshold:
        return EllipticityReport("certified", smallest.lam, matrix_min)
    if smallest.lam <= threshold:
        witness = {"x": [float(v) for v in smallest.x],
                   "y": [float(v) for v in smallest.y],
                   "value": float(smallest.lam)}
        return EllipticityReport("violated", smallest.lam, matrix_min, witness)
    return EllipticityReport("unverified", smallest.lam, matrix_min)


def third_order_spectral_norm(T: ThirdOrderTensor, config: Optional[SolverConfig] = None) -> float:
    """三阶张量谱范数 = 自缩并双二次张量最大 M-特征值的平方根"""
    gram: BiquadraticTensor = contract_third_order(T)
    return float(np.sqrt(max(largest_m_eigenvalue(gram, config).lam, 0.0)))
