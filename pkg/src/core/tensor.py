#!/usr/bin/env python3
"""
双二次张量核心 - 表示、校验、对称化、四次型求值与各种展开/折叠映射

记号：四阶张量 a[i1][j1][i2][j2]，形状 m x n x m x n（代码中下标从 0 开始）。
双二次对称性：a[i1][j1][i2][j2] = a[i2][j1][i1][j2] = a[i1][j2][i2][j1]。
"""

import logging
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.core.errors import DimensionMismatch, InvalidInputError, SymmetryViolation

logger = logging.getLogger(__name__)

LAYOUT = "dense-i1j1i2j2-rowmajor"
THIRD_ORDER_LAYOUT = "dense-kij-rowmajor"
DEFAULT_SYMMETRY_TOL = 1e-10

# SymMatrix / PairFlattening 直接用 ndarray 表示
SymMatrix = np.ndarray
PairFlattening = np.ndarray


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class Tensor4:
    """一般四阶张量 (m x n x m x n)，不要求对称性"""

    def __init__(self, entries: Any):
        array = np.array(entries, dtype=float)
        if array.ndim != 4 or array.shape[0] != array.shape[2] or array.shape[1] != array.shape[3]:
            raise DimensionMismatch(f"需要 m x n x m x n 形状的四阶数组，实际形状: {array.shape}")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise DimensionMismatch("维度 m, n 必须为正整数")
        if not np.all(np.isfinite(array)):
            raise InvalidInputError("张量包含非有限数值 (NaN/Inf)")
        self._entries = _frozen(array)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def m(self) -> int:
        return self._entries.shape[0]

    @property
    def n(self) -> int:
        return self._entries.shape[1]

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return self._entries.shape

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "n": self.n,
            "layout": LAYOUT,
            "entries": [float(v) for v in self._entries.ravel()],
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "Tensor4":
        try:
            m, n = int(payload["m"]), int(payload["n"])
            entries = np.asarray(payload["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"张量 JSON 格式错误: {e}") from e
        layout = payload.get("layout", LAYOUT)
        if layout != LAYOUT:
            raise InvalidInputError(f"不支持的存储布局: {layout}")
        if entries.size != m * n * m * n:
            raise DimensionMismatch(f"entries 长度 {entries.size} 与 m={m}, n={n} 不符")
        return Tensor4(entries.reshape(m, n, m, n))

    def _check_same_shape(self, other: "Tensor4"):
        if not isinstance(other, Tensor4) or other.shape != self.shape:
            raise DimensionMismatch("两个张量形状不一致")

    def __add__(self, other: "Tensor4") -> "Tensor4":
        self._check_same_shape(other)
        return _combine(self, other, self._entries + other.entries)

    def __sub__(self, other: "Tensor4") -> "Tensor4":
        self._check_same_shape(other)
        return _combine(self, other, self._entries - other.entries)

    def __mul__(self, scalar: float) -> "Tensor4":
        return type(self)._wrap(float(scalar) * self._entries)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor4":
        return self * -1.0

    @classmethod
    def _wrap(cls, array: np.ndarray) -> "Tensor4":
        return cls(array)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(m={self.m}, n={self.n})"


class BiquadraticTensor(Tensor4):
    """双二次张量：构造时严格（逐位）检查对称性"""

    def __init__(self, entries: Any):
        super().__init__(entries)
        deviation = max_symmetry_deviation(self)
        if deviation != 0.0:
            raise SymmetryViolation(deviation)

    @classmethod
    def _wrap(cls, array: np.ndarray) -> "BiquadraticTensor":
        # 对精确对称的数组做逐元素运算，结果仍精确对称
        instance = cls.__new__(cls)
        Tensor4.__init__(instance, array)
        return instance


def _combine(left: Tensor4, right: Tensor4, array: np.ndarray) -> Tensor4:
    if isinstance(left, BiquadraticTensor) and isinstance(right, BiquadraticTensor):
        return BiquadraticTensor._wrap(array)
    return Tensor4(array)


class ThirdOrderTensor:
    """三阶张量 t[k][i][j]，形状 p x m x n"""

    def __init__(self, entries: Any):
        array = np.array(entries, dtype=float)
        if array.ndim != 3 or min(array.shape) < 1:
            raise DimensionMismatch(f"需要 p x m x n 形状的三阶数组，实际形状: {array.shape}")
        if not np.all(np.isfinite(array)):
            raise InvalidInputError("三阶张量包含非有限数值")
        self._entries = _frozen(array)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self._entries.shape

    def to_dict(self) -> Dict[str, Any]:
        p, m, n = self.shape
        return {
            "p": p,
            "m": m,
            "n": n,
            "layout": THIRD_ORDER_LAYOUT,
            "entries": [float(v) for v in self._entries.ravel()],
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ThirdOrderTensor":
        try:
            p, m, n = int(payload["p"]), int(payload["m"]), int(payload["n"])
            entries = np.asarray(payload["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"三阶张量 JSON 格式错误: {e}") from e
        if entries.size != p * m * n:
            raise DimensionMismatch(f"entries 长度 {entries.size} 与 p={p}, m={m}, n={n} 不符")
        return cls(entries.reshape(p, m, n))


# ==================== 对称性 ====================

def _as_tensor4(T: Union[Tensor4, np.ndarray]) -> Tensor4:
    return T if isinstance(T, Tensor4) else Tensor4(T)


def _orbit(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """对称轨道上的三个置换：交换 i1/i2、交换 j1/j2、同时交换"""
    return a.transpose(2, 1, 0, 3), a.transpose(0, 3, 2, 1), a.transpose(2, 3, 0, 1)


def max_symmetry_deviation(T: Union[Tensor4, np.ndarray]) -> float:
    a = T.entries if isinstance(T, Tensor4) else np.asarray(T, dtype=float)
    swap_i, swap_j, _ = _orbit(a)
    return float(max(np.max(np.abs(a - swap_i)), np.max(np.abs(a - swap_j))))


def _orbit_average(a: np.ndarray) -> np.ndarray:
    swap_i, swap_j, swap_both = _orbit(a)
    # 配对求和保证结果逐位对称，且对已对称输入逐位不变
    return 0.25 * ((a + swap_i) + (swap_j + swap_both))


def symmetrize(T: Union[Tensor4, np.ndarray]) -> BiquadraticTensor:
    """四项平均投影到 BQ(m, n)，保持四次型不变"""
    tensor = _as_tensor4(T)
    return BiquadraticTensor._wrap(_orbit_average(tensor.entries))


def is_biquadratic(T: Union[Tensor4, np.ndarray], tol: float = DEFAULT_SYMMETRY_TOL) -> bool:
    tensor = _as_tensor4(T)
    scale = float(np.max(np.abs(tensor.entries)))
    return max_symmetry_deviation(tensor) <= tol * scale


def validate(T: Union[Tensor4, np.ndarray], tol: float = DEFAULT_SYMMETRY_TOL) -> BiquadraticTensor:
    """对称偏差不超过 tol * max|a| 时接受并做轨道平均，否则抛出 SymmetryViolation"""
    if tol < 0:
        raise InvalidInputError(f"容差必须非负: {tol}")
    tensor = _as_tensor4(T)
    if isinstance(tensor, BiquadraticTensor):
        return tensor
    deviation = max_symmetry_deviation(tensor)
    scale = float(np.max(np.abs(tensor.entries)))
    if deviation > tol * scale:
        raise SymmetryViolation(deviation)
    return BiquadraticTensor._wrap(_orbit_average(tensor.entries))


# ==================== 四次型与内积 ====================

def _vector(v: Any, size: int, name: str) -> np.ndarray:
    vec = np.asarray(v, dtype=float).ravel()
    if vec.size != size:
        raise DimensionMismatch(f"{name} 长度应为 {size}，实际为 {vec.size}")
    return vec


def quartic_form(A: Tensor4, x: Any, y: Any) -> float:
    """<A, x∘y∘x∘y> = Σ a[i1][j1][i2][j2] x[i1] y[j1] x[i2] y[j2]"""
    tensor = _as_tensor4(A)
    x = _vector(x, tensor.m, "x")
    y = _vector(y, tensor.n, "y")
    return float(np.einsum("ijkl,i,j,k,l->", tensor.entries, x, y, x, y))


def inner(A: Tensor4, B: Tensor4) -> float:
    A, B = _as_tensor4(A), _as_tensor4(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"内积形状不一致: {A.shape} vs {B.shape}")
    return float(np.sum(A.entries * B.entries))


def frobenius(A: Tensor4) -> float:
    return float(np.linalg.norm(_as_tensor4(A).entries.ravel()))


def add(A: Tensor4, B: Tensor4) -> Tensor4:
    return _as_tensor4(A) + _as_tensor4(B)


def scale(A: Tensor4, c: float) -> Tensor4:
    return _as_tensor4(A) * c


# ==================== 展开与折叠 ====================

def flatten_square(A: Tensor4) -> np.ndarray:
    """方阵展开 M(A)：(i1, j1) -> i1*n + j1，双二次张量对应对称矩阵"""
    tensor = _as_tensor4(A)
    size = tensor.m * tensor.n
    return tensor.entries.reshape(size, size).copy()


def unflatten_square(M: Any, m: int, n: int, tol: float = DEFAULT_SYMMETRY_TOL) -> BiquadraticTensor:
    matrix = np.asarray(M, dtype=float)
    if matrix.shape != (m * n, m * n):
        raise DimensionMismatch(f"矩阵阶数应为 {m * n}，实际形状: {matrix.shape}")
    return validate(Tensor4(matrix.reshape(m, n, m, n)), tol)


def flatten_mode1(A: Tensor4) -> np.ndarray:
    """第一指标展开 m x (n*m*n)，列按 (j1, i2, j2) 字典序"""
    tensor = _as_tensor4(A)
    return tensor.entries.reshape(tensor.m, -1).copy()


def flatten_mode2(A: Tensor4) -> np.ndarray:
    """第二指标展开 n x (m*m*n)，列按 (i1, i2, j2) 字典序"""
    tensor = _as_tensor4(A)
    return tensor.entries.transpose(1, 0, 2, 3).reshape(tensor.n, -1).copy()


def pair_indices(size: int) -> Tuple[np.ndarray, np.ndarray]:
    """下三角对 (i1 >= i2) 的枚举，位置 s = i1(i1+1)/2 + i2"""
    first, second = [], []
    for i1 in range(size):
        for i2 in range(i1 + 1):
            first.append(i1)
            second.append(i2)
    return np.array(first, dtype=int), np.array(second, dtype=int)


def pair_flatten(A: Tensor4) -> PairFlattening:
    tensor = _as_tensor4(A)
    i1, i2 = pair_indices(tensor.m)
    j1, j2 = pair_indices(tensor.n)
    a = tensor.entries
    return a[i1[:, None], j1[None, :], i2[:, None], j2[None, :]].copy()


def fold_sym(u: Any, m: int) -> SymMatrix:
    """把长度 m(m+1)/2 的向量折叠为对称矩阵（不做缩放）"""
    vec = np.asarray(u, dtype=float).ravel()
    if vec.size != m * (m + 1) // 2:
        raise DimensionMismatch(f"向量长度应为 {m * (m + 1) // 2}，实际为 {vec.size}")
    i1, i2 = pair_indices(m)
    folded = np.zeros((m, m))
    folded[i1, i2] = vec
    folded[i2, i1] = vec
    return folded


def lower_triangle(U: Any) -> np.ndarray:
    matrix = np.asarray(U, dtype=float)
    i1, i2 = pair_indices(matrix.shape[0])
    return matrix[i1, i2].copy()


# ==================== 构造器 ====================

def diagonal(m: int, n: int, d: Any) -> BiquadraticTensor:
    values = np.asarray(d, dtype=float)
    if values.shape != (m, n):
        raise DimensionMismatch(f"对角元数组形状应为 ({m}, {n})，实际为 {values.shape}")
    a = np.zeros((m, n, m, n))
    i, j = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    a[i, j, i, j] = values
    return BiquadraticTensor(a)


def identity(m: int, n: int) -> BiquadraticTensor:
    return diagonal(m, n, np.ones((m, n)))


def kronecker(S: Any, T: Any) -> BiquadraticTensor:
    """a[i1][j1][i2][j2] = S[i1][i2] * T[j1][j2]，对应 M(A) = S ⊗ T"""
    s = np.asarray(S, dtype=float)
    t = np.asarray(T, dtype=float)
    if s.ndim != 2 or t.ndim != 2 or s.shape[0] != s.shape[1] or t.shape[0] != t.shape[1]:
        raise DimensionMismatch("Kronecker 因子必须是方阵")
    if not (np.array_equal(s, s.T) and np.array_equal(t, t.T)):
        raise SymmetryViolation(max(np.max(np.abs(s - s.T)), np.max(np.abs(t - t.T))),
                                "Kronecker 因子必须是对称矩阵")
    return BiquadraticTensor(np.einsum("ik,jl->ijkl", s, t))


def rank_one(x: Any, y: Any) -> BiquadraticTensor:
    """x∘y∘x∘y，按 (x x^T)[i1,i2] * (y y^T)[j1,j2] 计算以保证逐位对称"""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or y.size == 0 or not np.any(x) or not np.any(y):
        raise InvalidInputError("秩一张量的因子向量必须非零")
    return kronecker(np.outer(x, x), np.outer(y, y))


def lame_from_technical(young: float, poisson: float) -> Tuple[float, float]:
    """杨氏模量/泊松比 -> Lamé 常数 (lambda, mu)"""
    if young <= 0 or not -1.0 < poisson < 0.5:
        raise InvalidInputError(f"无效的工程弹性常数: E={young}, v={poisson}")
    lam = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson))
    mu = young / (2.0 * (1.0 + poisson))
    return lam, mu


def elasticity_tensor(lam: float, mu: float, dim: int = 3) -> BiquadraticTensor:
    """各向同性弹性张量，四次型为 (lam+mu)(x·y)^2 + mu |x|^2 |y|^2"""
    delta = np.eye(dim)
    c = (lam * np.einsum("ij,kl->ijkl", delta, delta)
         + mu * (np.einsum("ik,jl->ijkl", delta, delta) + np.einsum("il,jk->ijkl", delta, delta)))
    return symmetrize(Tensor4(c))


def contract_third_order(T: ThirdOrderTensor) -> BiquadraticTensor:
    """三阶张量在第一个指标上与自身缩并，得到半正定双二次张量"""
    t = T.entries if isinstance(T, ThirdOrderTensor) else ThirdOrderTensor(T).entries
    gram = np.einsum("kij,kab->ijab", t, t)
    return symmetrize(Tensor4(gram))


def random_biquadratic(m: int, n: int, rng: Optional[np.random.Generator] = None) -> BiquadraticTensor:
    rng = rng if rng is not None else np.random.default_rng()
    return symmetrize(Tensor4(rng.standard_normal((m, n, m, n))))


def random_unit(size: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(size)
    norm = np.linalg.norm(v)
    while norm == 0.0:
        v = rng.standard_normal(size)
        norm = np.linalg.norm(v)
    return v / norm


def sign_normalize(v: Any, tol: float = 0.0) -> Tuple[np.ndarray, float]:
    """使第一个非零分量为正，返回 (规范化向量, 所乘符号)"""
    vec = np.asarray(v, dtype=float).ravel()
    nonzero = np.flatnonzero(np.abs(vec) > tol)
    if nonzero.size and vec[nonzero[0]] < 0:
        return -vec, -1.0
    return vec.copy(), 1.0

