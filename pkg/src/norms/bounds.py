#!/usr/bin/env python3
"""
范数界估计 - 核范数与谱范数的可证区间

核范数：
  ||M(A)||_* <= ||A||_* <= min(m, n) ||M(A)||_*
  任意秩一分解的 Σ|coef| 也是上界；对角张量时区间退化为 Σ|a_ijij|
谱范数：
  M-特征值搜索给出下界，||M(A)||_S 给出上界
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from src.core.tensor import BiquadraticTensor, Tensor4, flatten_square, inner
from src.decomposition.rank_one import DEFAULT_DROP_TOL, bq_rank_one_decompose
from src.eigen.m_eigen import spectral_norm_interval  # noqa: F401  (re-export)
from src.kernels.dense import matrix_nuclear_norm, matrix_spectral_norm
from src.norms.interval import NormInterval

logger = logging.getLogger(__name__)

DIAGONAL_TOL = 1e-12
DUALITY_TOL = 1e-8

MATRIX_NUCLEAR = "matrix-nuclear"
SANDWICH_UPPER = "min(m,n)·matrix-nuclear"
DECOMPOSITION_SUM = "decomposition-sum"
DIAGONAL_EXACT = "diagonal-exact"


def _off_diagonal_mask(m: int, n: int) -> np.ndarray:
    mask = np.ones((m, n, m, n), dtype=bool)
    i, j = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    mask[i, j, i, j] = False
    return mask


def diagonal_nuclear_exact(A: Tensor4, tol: float = DIAGONAL_TOL) -> Optional[float]:
    """对角张量返回 Σ|a_ijij|；存在绝对值超过 tol 的非对角元时返回 None"""
    a = A.entries
    if np.any(np.abs(a[_off_diagonal_mask(A.m, A.n)]) > tol):
        return None
    i, j = np.meshgrid(np.arange(A.m), np.arange(A.n), indexing="ij")
    return float(np.sum(np.abs(a[i, j, i, j])))


def nuclear_norm_interval(A: BiquadraticTensor, drop_tol: float = DEFAULT_DROP_TOL) -> NormInterval:
    exact_value = diagonal_nuclear_exact(A)
    if exact_value is not None:
        return NormInterval(exact_value, exact_value, DIAGONAL_EXACT, DIAGONAL_EXACT, exact=True)

    lower = matrix_nuclear_norm(flatten_square(A))
    sandwich = min(A.m, A.n) * lower
    decomposition_sum = bq_rank_one_decompose(A, drop_tol).coefficient_sum

    if decomposition_sum < sandwich:
        upper, upper_source = decomposition_sum, DECOMPOSITION_SUM
    else:
        upper, upper_source = sandwich, SANDWICH_UPPER

    interval = NormInterval(lower, upper, MATRIX_NUCLEAR, upper_source)
    logger.debug(f"核范数区间 [{interval.lower:.10g}, {interval.upper:.10g}] 上界来源 {upper_source}, "
                 f"比值 {interval.ratio:.6g}")
    return interval


@dataclass(frozen=True)
class DualityReport:
    """|<A, B̃>| <= ||A||_* 的上界，其中 B̃ = B / ||M(B)||_S 满足 ||B̃||_S <= 1"""
    value: float
    bound: float
    normalizer: float
    satisfied: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": float(self.value),
            "bound": float(self.bound),
            "normalizer": float(self.normalizer),
            "satisfied": bool(self.satisfied),
            "bound_source": "nuclear-upper",
            "normalizer_source": "matrix-spectral",
        }


def duality_check(A: Tensor4, B: Tensor4, drop_tol: float = DEFAULT_DROP_TOL) -> DualityReport:
    normalizer = matrix_spectral_norm(flatten_square(B))
    bound = nuclear_norm_interval(A, drop_tol).upper
    if normalizer == 0.0:
        return DualityReport(0.0, bound, 0.0, True)
    value = abs(inner(A, B)) / normalizer
    satisfied = value <= bound + DUALITY_TOL * max(1.0, bound)
    if not satisfied:
        logger.warning(f"⚠️ 对偶检查失败: {value:.12g} > {bound:.12g}")
    return DualityReport(value, bound, normalizer, satisfied)
