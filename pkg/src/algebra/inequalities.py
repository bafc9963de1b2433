#!/usr/bin/env python3
"""
范数不等式验证 - 张量积与逆的核范数/谱范数不等式

每一条检查都用可证界的方向写成"左边 <= 右边"形式，违反即说明库内部有缺陷：
  (a) lower(||AB||_*) <= upper(||A||_*) * upper(||B||_*)
  (b) upper(||A||_*) * upper(||A^{-1}||_*) >= mn          (需要逆存在)
  (c) upper(||A||_*) * upper(||A^{-1}||_S) >= 1           (需要逆存在)
  (d) lower(||AB||_S) <= upper(||A||_*) * upper(||B||_S)
另外记录 lower(||AB||_S) 是否超过 upper(||A||_S) * upper(||B||_S)，
即谱范数次乘性可能失效的实例（只观察，不计入结论）。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.algebra.product import inverse, product
from src.core.errors import NotInvertibleInBQ, SingularFlattening
from src.core.settings import ToleranceConfig
from src.core.tensor import BiquadraticTensor, flatten_square, symmetrize
from src.eigen.m_eigen import SolverConfig, spectral_norm_interval
from src.kernels.dense import matrix_nuclear_norm, matrix_spectral_norm
from src.norms.bounds import nuclear_norm_interval

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    left: float
    right: float
    satisfied: bool
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "left": float(self.left),
            "right": float(self.right),
            "satisfied": bool(self.satisfied),
            "note": self.note,
        }


@dataclass
class InequalityReport:
    checks: List[InequalityCheck] = field(default_factory=list)
    skipped: List[Dict[str, str]] = field(default_factory=list)
    observations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def all_sound(self) -> bool:
        return all(check.satisfied for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "checks": [c.to_dict() for c in self.checks],
            "all_sound": self.all_sound,
            "skipped": list(self.skipped),
            "observations": list(self.observations),
        }


def _at_most(name: str, left: float, right: float, tol: float, note: str) -> InequalityCheck:
    return InequalityCheck(name, left, right, left <= right + tol * max(1.0, abs(right)), note)


def _at_least(name: str, left: float, right: float, tol: float, note: str) -> InequalityCheck:
    return InequalityCheck(name, left, right, left >= right - tol * max(1.0, abs(right)), note)


def verify_inequalities(A: BiquadraticTensor, B: BiquadraticTensor,
                        config: Optional[SolverConfig] = None,
                        tolerances: Optional[ToleranceConfig] = None) -> InequalityReport:
    config = config or SolverConfig()
    tolerances = tolerances or ToleranceConfig()
    tol = tolerances.inequality
    report = InequalityReport()

    nuclear_a = nuclear_norm_interval(A, tolerances.drop)
    nuclear_b = nuclear_norm_interval(B, tolerances.drop)
    spectral_a = spectral_norm_interval(A, config)
    spectral_b = spectral_norm_interval(B, config)

    C = product(A, B, tolerances.symmetry)
    nuclear_c_lower = matrix_nuclear_norm(flatten_square(C))
    # C 与其对称化有相同的四次型，因此 M-特征值搜索给出 ||AB||_S 的下界
    spectral_c_lower = spectral_norm_interval(symmetrize(C), config).lower

    report.checks.append(_at_most(
        "nuclear_submultiplicative", nuclear_c_lower, nuclear_a.upper * nuclear_b.upper, tol,
        f"lower: matrix-nuclear; upper: {nuclear_a.upper_source} x {nuclear_b.upper_source}",
    ))

    try:
        A_inv = inverse(A, tolerances.inverse, tolerances.condition_limit)
    except (SingularFlattening, NotInvertibleInBQ) as e:
        A_inv = None
        reason = type(e).__name__
        report.skipped.append({"name": "nuclear_inverse_product", "reason": reason})
        report.skipped.append({"name": "nuclear_spectral_inverse_product", "reason": reason})
        logger.debug(f"逆不存在 ({reason})，跳过两项含逆的检查")

    if A_inv is not None:
        nuclear_inv = nuclear_norm_interval(A_inv, tolerances.drop)
        spectral_inv_upper = matrix_spectral_norm(flatten_square(A_inv))
        report.checks.append(_at_least(
            "nuclear_inverse_product", nuclear_a.upper * nuclear_inv.upper, float(A.m * A.n), tol,
            "upper bounds of ||A||_* and ||A^-1||_*; right side is mn",
        ))
        report.checks.append(_at_least(
            "nuclear_spectral_inverse_product", nuclear_a.upper * spectral_inv_upper, 1.0, tol,
            "upper bounds of ||A||_* and ||A^-1||_S (matrix-spectral)",
        ))

    report.checks.append(_at_most(
        "spectral_nuclear_mixed", spectral_c_lower, nuclear_a.upper * spectral_b.upper, tol,
        "lower: m-eigen-search on AB; upper: nuclear(A) x matrix-spectral(B)",
    ))

    product_bound = spectral_a.upper * spectral_b.upper
    report.observations.append({
        "name": "spectral_submultiplicative",
        "left": float(spectral_c_lower),
        "right": float(product_bound),
        "exceeded": bool(spectral_c_lower > product_bound + tol * max(1.0, product_bound)),
        "note": "recorded only; submultiplicativity of the spectral norm may fail",
    })
    report.observations.append({
        "name": "nuclear_interval_ratio",
        "left": float(nuclear_a.lower),
        "right": float(nuclear_a.upper),
        "ratio": float(nuclear_a.ratio),
        "note": "upper/lower of the certified nuclear interval of A",
    })

    if not report.all_sound:
        failed = [c.name for c in report.checks if not c.satisfied]
        logger.warning(f"⚠️ 不等式检查失败: {failed}")
    return report
