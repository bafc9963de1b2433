#!/usr/bin/env python3
"""
双二次秩一分解 - 构造性算法

步骤：
  1. 对称对展开 P = pair_flatten(A)
  2. 奇异值分解 P = Σ σ_k u_k v_k^T
  3. u_k、v_k 折叠为对称矩阵 U_k、V_k，再分别做特征分解
  4. 每个 (σ_k, λ, μ, x, y) 产生一项 σ_k λ μ · x∘y∘x∘y
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.errors import DimensionMismatch, InvalidInputError
from src.core.tensor import (
    BiquadraticTensor,
    Tensor4,
    flatten_mode1,
    flatten_mode2,
    fold_sym,
    frobenius,
    pair_flatten,
    sign_normalize,
    symmetrize,
)
from src.kernels.dense import matrix_rank, svd, symeig

logger = logging.getLogger(__name__)

DEFAULT_DROP_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class RankOneTerm:
    coef: float
    x: np.ndarray
    y: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {
            "coef": float(self.coef),
            "x": [float(v) for v in self.x],
            "y": [float(v) for v in self.y],
        }


@dataclass(frozen=True)
class BQDecomposition:
    m: int
    n: int
    terms: Tuple[RankOneTerm, ...]
    reconstruction_error: float = 0.0

    @property
    def coefficient_sum(self) -> float:
        """Σ|coef|，双二次核范数的上界"""
        return float(sum(abs(t.coef) for t in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "n": self.n,
            "terms": [t.to_dict() for t in self.terms],
            "reconstruction_error": float(self.reconstruction_error),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "BQDecomposition":
        try:
            terms = tuple(
                RankOneTerm(float(t["coef"]), np.asarray(t["x"], dtype=float), np.asarray(t["y"], dtype=float))
                for t in payload["terms"]
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"分解 JSON 格式错误: {e}") from e
        if terms:
            m, n = terms[0].x.size, terms[0].y.size
        else:
            m, n = int(payload["m"]), int(payload["n"])
        return cls(m, n, terms, float(payload.get("reconstruction_error", 0.0)))


def term_bound(m: int, n: int) -> int:
    """构造给出的项数上界 mn * min(m(m+1)/2, n(n+1)/2)"""
    return m * n * min(m * (m + 1) // 2, n * (n + 1) // 2)


def make_term(coef: float, x: Any, y: Any) -> Optional[RankOneTerm]:
    """单位化并规范符号；x、y 在项中各出现两次，符号翻转不影响系数"""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0 or coef == 0.0:
        return None
    x, _ = sign_normalize(x / nx)
    y, _ = sign_normalize(y / ny)
    return RankOneTerm(float(coef) * nx * nx * ny * ny, x, y)


def reconstruct(D: BQDecomposition) -> BiquadraticTensor:
    """Σ coef · x∘y∘x∘y"""
    if not D.terms:
        return BiquadraticTensor(np.zeros((D.m, D.n, D.m, D.n)))
    coefs = np.array([t.coef for t in D.terms])
    xs = np.array([t.x for t in D.terms])
    ys = np.array([t.y for t in D.terms])
    raw = np.einsum("r,ri,rj,rk,rl->ijkl", coefs, xs, ys, xs, ys, optimize=True)
    return symmetrize(Tensor4(raw))


def relative_error(A: Tensor4, B: Tensor4) -> float:
    if A.shape != B.shape:
        raise DimensionMismatch(f"形状不一致: {A.shape} vs {B.shape}")
    scale = frobenius(A)
    diff = float(np.linalg.norm((A.entries - B.entries).ravel()))
    return diff / scale if scale > 0 else diff


def bq_rank_one_decompose(A: BiquadraticTensor, drop_tol: float = DEFAULT_DROP_TOL) -> BQDecomposition:
    m, n = A.m, A.n
    scale = frobenius(A)
    if scale == 0.0:
        return BQDecomposition(m, n, (), 0.0)

    threshold = drop_tol * scale
    d = svd(pair_flatten(A))
    terms: List[RankOneTerm] = []
    for k, sigma in enumerate(d.sigma):
        if sigma <= threshold:
            continue
        fold_u = symeig(fold_sym(d.U[:, k], m))
        fold_v = symeig(fold_sym(d.V[:, k], n))
        for a in range(m):
            for b in range(n):
                coef = sigma * fold_u.values[a] * fold_v.values[b]
                if abs(coef) <= threshold:
                    continue
                term = make_term(coef, fold_u.vectors[:, a], fold_v.vectors[:, b])
                if term is not None:
                    terms.append(term)

    decomposition = BQDecomposition(m, n, tuple(terms))
    error = relative_error(A, reconstruct(decomposition))
    logger.debug(f"秩一分解: {len(terms)} 项 (上界 {term_bound(m, n)}), 相对误差 {error:.2e}")
    return BQDecomposition(m, n, tuple(terms), error)


def factor_matrices(D: BQDecomposition) -> Tuple[np.ndarray, np.ndarray]:
    """因子矩阵 X (m x r)、Y (n x r)，第 k 列为 |coef_k|^{1/2} 缩放后的 x_k、y_k"""
    if not D.terms:
        return np.zeros((D.m, 0)), np.zeros((D.n, 0))
    weights = np.sqrt(np.abs([t.coef for t in D.terms]))
    X = np.column_stack([t.x for t in D.terms]) * weights
    Y = np.column_stack([t.y for t in D.terms]) * weights
    return X, Y


def tucker_ranks(A: Tensor4, rank_tol: float = DEFAULT_RANK_TOL) -> Tuple[int, int]:
    """两个指标展开的秩 (R1, R2)"""
    return matrix_rank(flatten_mode1(A), rank_tol), matrix_rank(flatten_mode2(A), rank_tol)
