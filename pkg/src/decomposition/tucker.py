#!/usr/bin/env python3
"""
双二次 Tucker 分解 - A = B ×1 P ×2 Q ×3 P ×4 Q

支持两种形式：
  - orthonormal: HOSVD，P、Q 取两个指标展开的前导左奇异向量
  - independent: 给定列满秩 P、Q，用左伪逆求核心张量
以及双二次秩保持性的构造性检查（分解在 A 与核心之间的前推/回拉）。
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from src.core.errors import DimensionMismatch
from src.core.tensor import (
    BiquadraticTensor,
    Tensor4,
    flatten_mode1,
    flatten_mode2,
    sign_normalize,
    symmetrize,
)
from src.decomposition.rank_one import (
    DEFAULT_DROP_TOL,
    BQDecomposition,
    RankOneTerm,
    bq_rank_one_decompose,
    make_term,
    reconstruct,
    relative_error,
)
from src.kernels.dense import left_pseudoinverse, svd

logger = logging.getLogger(__name__)

ORTHONORMAL = "orthonormal"
INDEPENDENT = "independent"
EXACT_TOL = 1e-8


@dataclass(frozen=True)
class TuckerForm:
    core: BiquadraticTensor
    P: np.ndarray
    Q: np.ndarray
    kind: str
    reconstruction_error: float = 0.0

    @property
    def exact(self) -> bool:
        return self.reconstruction_error <= EXACT_TOL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "core": self.core.to_dict(),
            "P": self.P.tolist(),
            "Q": self.Q.tolist(),
            "reconstruction_error": float(self.reconstruction_error),
            "exact": self.exact,
        }


@dataclass(frozen=True)
class BRPreservationReport:
    """
    核心 B 与 A 之间分解的双向传输：
      push-forward: B 的分解经 x -> Px, y -> Qy 重建 A，说明 BR(A) <= 该项数
      pull-back:    A 的分解经 x -> P̂x, y -> Q̂y 重建 B，说明 BR(B) <= 该项数
    """
    terms_a: int
    terms_core: int
    pushed_terms: int
    pulled_terms: int
    push_error: float
    pull_error: float
    core_error: float
    tol: float

    @property
    def satisfied(self) -> bool:
        return self.push_error <= self.tol and self.pull_error <= self.tol

    def to_dict(self) -> Dict[str, Any]:
        return {
            "terms_a": self.terms_a,
            "terms_core": self.terms_core,
            "pushed_terms": self.pushed_terms,
            "pulled_terms": self.pulled_terms,
            "push_error": float(self.push_error),
            "pull_error": float(self.pull_error),
            "core_error": float(self.core_error),
            "satisfied": self.satisfied,
        }


def mode_multiply(B: Tensor4, P: Any, Q: Any) -> Tensor4:
    """a[i1][j1][i2][j2] = Σ b[k1][l1][k2][l2] P[i1][k1] Q[j1][l1] P[i2][k2] Q[j2][l2]"""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.ndim != 2 or Q.ndim != 2 or P.shape[1] != B.m or Q.shape[1] != B.n:
        raise DimensionMismatch(
            f"因子矩阵形状不匹配: P {P.shape}, Q {Q.shape}, 核心 ({B.m}, {B.n})"
        )
    raw = np.einsum("abcd,ia,jb,kc,ld->ijkl", B.entries, P, Q, P, Q, optimize=True)
    if isinstance(B, BiquadraticTensor):
        return symmetrize(Tensor4(raw))
    return Tensor4(raw)


def tucker_reconstruct(form: TuckerForm) -> BiquadraticTensor:
    return mode_multiply(form.core, form.P, form.Q)


def _leading_left_vectors(matrix: np.ndarray, count: int) -> np.ndarray:
    U = svd(matrix).U[:, :count]
    return np.column_stack([sign_normalize(U[:, k])[0] for k in range(count)])


def hosvd(A: BiquadraticTensor, d1: int, d2: int) -> TuckerForm:
    if not (1 <= d1 <= A.m and 1 <= d2 <= A.n):
        raise DimensionMismatch(f"核心维度需满足 1 <= d1 <= {A.m}, 1 <= d2 <= {A.n}，实际 ({d1}, {d2})")
    P = _leading_left_vectors(flatten_mode1(A), d1)
    Q = _leading_left_vectors(flatten_mode2(A), d2)
    core = mode_multiply(A, P.T, Q.T)
    error = relative_error(A, mode_multiply(core, P, Q))
    logger.debug(f"HOSVD ({d1}, {d2}): 相对重建误差 {error:.2e}")
    return TuckerForm(core=core, P=P, Q=Q, kind=ORTHONORMAL, reconstruction_error=error)


def independent_core(A: BiquadraticTensor, P: Any, Q: Any) -> TuckerForm:
    """核心 B = A ×1 P̂ ×2 Q̂ ×3 P̂ ×4 Q̂，P̂ = (P^T P)^{-1} P^T；A 不在张成空间内时误差会体现在报告里"""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape[0] != A.m or Q.shape[0] != A.n:
        raise DimensionMismatch(f"因子行数应为 ({A.m}, {A.n})，实际 ({P.shape[0]}, {Q.shape[0]})")
    core = mode_multiply(A, left_pseudoinverse(P), left_pseudoinverse(Q))
    error = relative_error(A, mode_multiply(core, P, Q))
    if error > EXACT_TOL:
        logger.warning(f"⚠️ A 不在因子张成空间内，重建误差 {error:.3g}")
    return TuckerForm(core=core, P=P, Q=Q, kind=INDEPENDENT, reconstruction_error=error)


def transport(D: BQDecomposition, P: np.ndarray, Q: np.ndarray) -> BQDecomposition:
    """把分解的每一项经 x -> Px, y -> Qy 变换，系数吸收 |Px|^2 |Qy|^2，零像项丢弃"""
    terms: List[RankOneTerm] = []
    for term in D.terms:
        moved: Optional[RankOneTerm] = make_term(term.coef, P @ term.x, Q @ term.y)
        if moved is not None:
            terms.append(moved)
    return BQDecomposition(P.shape[0], Q.shape[0], tuple(terms))


def br_preservation_check(A: BiquadraticTensor, P: Any, Q: Any, tol: float = EXACT_TOL,
                          drop_tol: float = DEFAULT_DROP_TOL) -> BRPreservationReport:
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    form = independent_core(A, P, Q)
    core = form.core

    decomposition_a = bq_rank_one_decompose(A, drop_tol)
    decomposition_core = bq_rank_one_decompose(core, drop_tol)

    pushed = transport(decomposition_core, P, Q)
    pulled = transport(decomposition_a, left_pseudoinverse(P), left_pseudoinverse(Q))

    report = BRPreservationReport(
        terms_a=len(decomposition_a),
        terms_core=len(decomposition_core),
        pushed_terms=len(pushed),
        pulled_terms=len(pulled),
        push_error=relative_error(A, reconstruct(pushed)),
        pull_error=relative_error(core, reconstruct(pulled)),
        core_error=form.reconstruction_error,
        tol=tol,
    )
    logger.info(f"秩保持检查: A {report.terms_a} 项, 核心 {report.terms_core} 项, "
                f"前推误差 {report.push_error:.2e}, 回拉误差 {report.pull_error:.2e}")
    return report
