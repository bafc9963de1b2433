#!/usr/bin/env python3
"""
稠密线性代数内核 - 循环 Jacobi 对称特征分解与单边 Jacobi 奇异值分解
所有上层模块（分解、范数界、M-特征值）都只通过这里访问矩阵分解
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.errors import ConvergenceFailure, DimensionMismatch, RankDeficient

logger = logging.getLogger(__name__)

MAX_SWEEPS = 100
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenDecomposition:
    """对称矩阵的特征分解，特征值按绝对值降序排列"""
    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


@dataclass(frozen=True)
class SingularValueDecomposition:
    """薄奇异值分解 A = U diag(sigma) V^T，sigma 降序"""
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T

    def rank(self, rel_tol: Optional[float] = None) -> int:
        return numerical_rank(self.sigma, rel_tol, size=max(self.U.shape[0], self.V.shape[0]))


def numerical_rank(sigma: np.ndarray, rel_tol: Optional[float] = None, size: int = 1) -> int:
    """按 sigma > rel_tol * sigma_max 统计数值秩；rel_tol 缺省为 size * eps"""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0 or sigma[0] <= 0.0:
        return 0
    if rel_tol is None:
        rel_tol = max(size, 1) * EPS
    return int(np.count_nonzero(sigma > rel_tol * sigma.max()))


def _as_matrix(A) -> np.ndarray:
    a = np.array(A, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"需要二维矩阵，实际维数: {a.ndim}")
    return a


def _rotation(diff: float, off: float) -> tuple:
    """返回使 2x2 对称块 [[a, off], [off, a + 2*diff*off]] 对角化的 (c, s)"""
    theta = diff / (2.0 * off)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, t * c


def symeig(S, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """循环 Jacobi 旋转求对称矩阵的全部特征对"""
    a = _as_matrix(S)
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionMismatch(f"对称特征分解需要方阵，实际形状: {a.shape}")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    threshold = n * EPS * scale

    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        # 非对角部分的 Frobenius 范数，直接求而不是做差
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= threshold:
            break
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold / n:
                    continue
                rotated = True
                c, s = _rotation(a[q, q] - a[p, p], apq)

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
        if not rotated:
            break
    else:
        raise ConvergenceFailure(f"Jacobi 特征分解在 {max_sweeps} 轮扫描内未收敛",
                                 best=EigenDecomposition(np.diag(a).copy(), v, max_sweeps))

    values = np.diag(a).copy()
    order = np.lexsort((-values, -np.abs(values)))
    return EigenDecomposition(values=values[order], vectors=v[:, order], sweeps=sweeps)


def _complete_orthonormal(basis: np.ndarray, rows: int, count: int) -> np.ndarray:
    """用标准基向量把正交列组补齐 count 列"""
    columns = [basis[:, k] for k in range(basis.shape[1])]
    while len(columns) < count:
        best, best_norm = None, -1.0
        for i in range(rows):
            candidate = np.zeros(rows)
            candidate[i] = 1.0
            for _ in range(2):
                for col in columns:
                    candidate -= (col @ candidate) * col
            norm = np.linalg.norm(candidate)
            if norm > best_norm:
                best, best_norm = candidate, norm
        columns.append(best / best_norm)
    return np.column_stack(columns) if columns else np.zeros((rows, 0))


def svd(A, max_sweeps: int = MAX_SWEEPS) -> SingularValueDecomposition:
    """单边 (Hestenes) Jacobi 奇异值分解，返回薄分解"""
    a = _as_matrix(A)
    rows, cols = a.shape
    if rows < cols:
        t = svd(a.T, max_sweeps)
        return SingularValueDecomposition(U=t.V, sigma=t.sigma, V=t.U, sweeps=t.sweeps)

    u = a.copy()
    v = np.eye(cols)
    scale = float(np.linalg.norm(a))
    tol = rows * EPS
    tiny = (EPS * scale) ** 2

    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = u[:, p] @ u[:, p]
                beta = u[:, q] @ u[:, q]
                gamma = u[:, p] @ u[:, q]
                bound = np.sqrt(alpha * beta)
                if bound <= tiny or abs(gamma) <= tol * bound:
                    continue
                rotated = True
                c, s = _rotation(beta - alpha, gamma)
                col_p, col_q = u[:, p].copy(), u[:, q].copy()
                u[:, p] = c * col_p - s * col_q
                u[:, q] = s * col_p + c * col_q
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
        if not rotated:
            break
    else:
        raise ConvergenceFailure(f"单边 Jacobi SVD 在 {max_sweeps} 轮扫描内未收敛")

    sigma = np.sqrt(np.sum(u * u, axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma, u, v = sigma[order], u[:, order], v[:, order]

    keep = numerical_rank(sigma, size=rows)
    left = u[:, :keep] / sigma[:keep]
    left = _complete_orthonormal(left, rows, cols)
    return SingularValueDecomposition(U=left, sigma=sigma, V=v, sweeps=sweeps)


def matrix_spectral_norm(A) -> float:
    sigma = svd(A).sigma
    return float(sigma[0]) if sigma.size else 0.0


def matrix_nuclear_norm(A) -> float:
    return float(np.sum(svd(A).sigma))


def matrix_rank(A, rel_tol: Optional[float] = None) -> int:
    a = _as_matrix(A)
    if a.size == 0:
        return 0
    return svd(a).rank(rel_tol)


def left_pseudoinverse(P, rel_tol: Optional[float] = None) -> np.ndarray:
    """P 列满秩时返回 (P^T P)^{-1} P^T"""
    p = _as_matrix(P)
    rows, cols = p.shape
    if rows < cols:
        raise RankDeficient(f"{rows}x{cols} 矩阵不可能列满秩")
    d = svd(p)
    if d.rank(rel_tol) < cols:
        raise RankDeficient(f"矩阵列秩不足: rank={d.rank(rel_tol)} < {cols}")
    return (d.V / d.sigma) @ d.U.T
