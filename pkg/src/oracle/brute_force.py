#!/usr/bin/env python3
"""
暴力参考实现 - 角度网格穷举与逐下标循环的朴素版本

与生产代码路径完全独立，只用于测试中的交叉比对。
"""

import logging
from typing import Any, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import DimensionTooLarge
from src.core.tensor import Tensor4, ThirdOrderTensor, random_unit

logger = logging.getLogger(__name__)

MAX_GRID_DIM = 3
CHUNK = 512


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    resolution: int = Field(default=90, ge=8)
    samples: int = Field(default=2000, ge=0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)


def sphere_grid(dim: int, resolution: int) -> np.ndarray:
    """半球面角度网格（四次型关于 ±x 对称），每个角坐标 resolution 个点"""
    if dim > MAX_GRID_DIM:
        raise DimensionTooLarge(f"网格维度 {dim} 超过上限 {MAX_GRID_DIM}")
    if dim == 1:
        return np.ones((1, 1))
    phi = np.arange(resolution) * np.pi / resolution
    if dim == 2:
        return np.column_stack([np.cos(phi), np.sin(phi)])
    theta = np.linspace(0.0, np.pi, resolution + 1)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    return np.column_stack([(np.sin(t) * np.cos(p)).ravel(),
                            (np.sin(t) * np.sin(p)).ravel(),
                            np.cos(t).ravel()])


def _with_samples(grid: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    if count == 0:
        return grid
    extra = np.array([random_unit(grid.shape[1], rng) for _ in range(count)])
    return np.vstack([grid, extra])


def grid_tolerance(A: Tensor4, spec: GridSpec) -> float:
    """曲率误差模型：C * ||M(A)||_S * (π/resolution)^2，C = (m+n-2)/2"""
    size = A.m * A.n
    spectral = float(np.linalg.norm(A.entries.reshape(size, size), 2))
    return 0.5 * (A.m + A.n - 2) * spectral * (np.pi / spec.resolution) ** 2


def quartic_extrema_grid(A: Tensor4, spec: GridSpec = GridSpec()
                         ) -> Tuple[float, float, Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]:
    """返回 (min, max, argmin, argmax)，argmin/argmax 为 (x, y)"""
    if A.m > MAX_GRID_DIM or A.n > MAX_GRID_DIM:
        raise DimensionTooLarge(f"网格枚举要求 m, n <= {MAX_GRID_DIM}，实际 ({A.m}, {A.n})")
    rng = np.random.default_rng(spec.seed)
    xs = _with_samples(sphere_grid(A.m, spec.resolution), spec.samples, rng)
    ys = _with_samples(sphere_grid(A.n, spec.resolution), spec.samples, rng)

    # f(x, y) = Σ W[(i1,i2),(j1,j2)] (x⊗x)[(i1,i2)] (y⊗y)[(j1,j2)]
    W = A.entries.transpose(0, 2, 1, 3).reshape(A.m * A.m, A.n * A.n)
    yy = np.einsum("gi,gj->gij", ys, ys).reshape(len(ys), -1)

    lo, hi = np.inf, -np.inf
    arg_lo = arg_hi = (0, 0)
    for start in range(0, len(xs), CHUNK):
        block = xs[start:start + CHUNK]
        xx = np.einsum("gi,gj->gij", block, block).reshape(len(block), -1)
        values = xx @ W @ yy.T
        k_lo = np.unravel_index(np.argmin(values), values.shape)
        k_hi = np.unravel_index(np.argmax(values), values.shape)
        if values[k_lo] < lo:
            lo, arg_lo = float(values[k_lo]), (start + k_lo[0], k_lo[1])
        if values[k_hi] > hi:
            hi, arg_hi = float(values[k_hi]), (start + k_hi[0], k_hi[1])

    return (lo, hi,
            (xs[arg_lo[0]].copy(), ys[arg_lo[1]].copy()),
            (xs[arg_hi[0]].copy(), ys[arg_hi[1]].copy()))


def third_order_spectral_norm_brute(T: ThirdOrderTensor, spec: GridSpec = GridSpec()) -> float:
    """max |Σ t[k][i][j] z_k x_i y_j|；对 z 的最大值取闭式 ||w||，w_k = Σ t[k][i][j] x_i y_j"""
    p, m, n = T.shape
    if max(p, m, n) > MAX_GRID_DIM:
        raise DimensionTooLarge(f"网格枚举要求 p, m, n <= {MAX_GRID_DIM}，实际 ({p}, {m}, {n})")
    rng = np.random.default_rng(spec.seed)
    xs = _with_samples(sphere_grid(m, spec.resolution), spec.samples, rng)
    ys = _with_samples(sphere_grid(n, spec.resolution), spec.samples, rng)

    best = 0.0
    for start in range(0, len(xs), CHUNK):
        block = xs[start:start + CHUNK]
        w = np.einsum("kij,gi,hj->ghk", T.entries, block, ys, optimize=True)
        best = max(best, float(np.sqrt(np.max(np.sum(w * w, axis=-1)))))
    return best


# ==================== 朴素循环版本 ====================

def naive_quartic(A: Tensor4, x: Any, y: Any) -> float:
    a = A.entries
    m, n = A.m, A.n
    total = 0.0
    for i1 in range(m):
        for j1 in range(n):
            for i2 in range(m):
                for j2 in range(n):
                    total += a[i1, j1, i2, j2] * x[i1] * y[j1] * x[i2] * y[j2]
    return total


def naive_flatten(A: Tensor4) -> np.ndarray:
    m, n = A.m, A.n
    M = np.zeros((m * n, m * n))
    for i1 in range(m):
        for j1 in range(n):
            for i2 in range(m):
                for j2 in range(n):
                    M[i1 * n + j1, i2 * n + j2] = A.entries[i1, j1, i2, j2]
    return M


def naive_product(A: Tensor4, B: Tensor4) -> np.ndarray:
    a, b = A.entries, B.entries
    m, n = A.m, A.n
    c = np.zeros((m, n, m, n))
    for i1 in range(m):
        for j1 in range(n):
            for i2 in range(m):
                for j2 in range(n):
                    total = 0.0
                    for i3 in range(m):
                        for j3 in range(n):
                            total += a[i1, j1, i3, j3] * b[i3, j3, i2, j2]
                    c[i1, j1, i2, j2] = total
    return c


def naive_mode_multiply(B: Tensor4, P: Any, Q: Any) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    b = B.entries
    m, n = P.shape[0], Q.shape[0]
    d1, d2 = B.m, B.n
    a = np.zeros((m, n, m, n))
    for i1 in range(m):
        for j1 in range(n):
            for i2 in range(m):
                for j2 in range(n):
                    total = 0.0
                    for k1 in range(d1):
                        for l1 in range(d2):
                            for k2 in range(d1):
                                for l2 in range(d2):
                                    total += (b[k1, l1, k2, l2] * P[i1, k1] * Q[j1, l1]
                                              * P[i2, k2] * Q[j2, l2])
                    a[i1, j1, i2, j2] = total
    return a
