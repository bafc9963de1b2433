#!/usr/bin/env python3
"""
张量积与逆 - 通过方阵展开 M(AB) = M(A) M(B) 实现
"""

import logging
from typing import Union

import numpy as np

from src.core.errors import DimensionMismatch, NotInvertibleInBQ, SingularFlattening
from src.core.tensor import (
    BiquadraticTensor,
    Tensor4,
    flatten_square,
    is_biquadratic,
    max_symmetry_deviation,
    validate,
)
from src.kernels.dense import symeig

logger = logging.getLogger(__name__)

DEFAULT_SYMMETRY_TOL = 1e-10
DEFAULT_INVERSE_TOL = 1e-8
DEFAULT_CONDITION_LIMIT = 1e12


def raw_product(A: Tensor4, B: Tensor4) -> Tensor4:
    """c[i1][j1][i2][j2] = Σ a[i1][j1][i3][j3] b[i3][j3][i2][j2]"""
    if A.shape != B.shape:
        raise DimensionMismatch(f"张量积要求形状一致: {A.shape} vs {B.shape}")
    C = flatten_square(A) @ flatten_square(B)
    return Tensor4(C.reshape(A.shape))


def product(A: Tensor4, B: Tensor4,
            symmetry_tol: float = DEFAULT_SYMMETRY_TOL) -> Union[BiquadraticTensor, Tensor4]:
    """
    结果通过对称性检验时返回 BiquadraticTensor，否则返回一般四阶张量
    (两个双二次张量的积一般不保持 j1 <-> j2 对称)
    """
    raw = raw_product(A, B)
    if is_biquadratic(raw, symmetry_tol):
        return validate(raw, symmetry_tol)
    logger.warning(f"⚠️ 张量积不是双二次张量，对称偏差 {max_symmetry_deviation(raw):.3g}，返回一般四阶张量")
    return raw


def inverse(A: BiquadraticTensor, tol: float = DEFAULT_INVERSE_TOL,
            condition_limit: float = DEFAULT_CONDITION_LIMIT) -> BiquadraticTensor:
    """M(A)^{-1} 折叠回双二次张量；对称偏差超过 tol*max|entry| 时抛出 NotInvertibleInBQ"""
    decomposition = symeig(flatten_square(A))
    magnitudes = np.abs(decomposition.values)
    smallest, largest = float(magnitudes.min()), float(magnitudes.max())
    if smallest == 0.0 or largest / smallest > condition_limit:
        condition = float("inf") if smallest == 0.0 else largest / smallest
        raise SingularFlattening(f"M(A) 奇异或病态，条件数估计 {condition:.3g} 超过 {condition_limit:.3g}")

    V = decomposition.vectors
    inverse_matrix = (V / decomposition.values) @ V.T
    folded = Tensor4(inverse_matrix.reshape(A.shape))
    deviation = max_symmetry_deviation(folded)
    if deviation > tol * float(np.max(np.abs(folded.entries))):
        logger.warning(f"⚠️ 发现 M(A) 可逆但逆不在 BQ({A.m}, {A.n}) 中的实例，对称偏差 {deviation:.3g}")
        raise NotInvertibleInBQ(deviation)
    return validate(folded, tol)
