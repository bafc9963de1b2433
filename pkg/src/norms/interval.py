#!/usr/bin/env python3
"""
范数区间 - 带来源标记的可证上下界
"""

from dataclasses import dataclass
from typing import Any, Dict

from src.core.errors import IntervalInconsistency

CONSISTENCY_TOL = 1e-10
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class NormInterval:
    """lower <= ||A|| <= upper，并记录每个界来自哪种计算"""
    lower: float
    upper: float
    lower_source: str
    upper_source: str
    exact: bool = False

    def __post_init__(self):
        lower, upper = float(self.lower), float(self.upper)
        if lower > upper + CONSISTENCY_TOL * max(1.0, abs(upper)):
            raise IntervalInconsistency(
                f"区间不一致: lower={lower:.12g} ({self.lower_source}) > "
                f"upper={upper:.12g} ({self.upper_source})"
            )
        if lower < -CONSISTENCY_TOL or upper < -CONSISTENCY_TOL:
            raise IntervalInconsistency(f"范数界出现负值: [{lower}, {upper}]")
        upper = max(upper, 0.0)
        # 容差内的交叉只来自舍入
        object.__setattr__(self, "lower", min(max(lower, 0.0), upper))
        object.__setattr__(self, "upper", upper)
        if not self.exact and abs(self.upper - self.lower) <= EXACT_TOL * max(1.0, self.upper):
            object.__setattr__(self, "exact", True)

    @property
    def width(self) -> float:
        return max(self.upper - self.lower, 0.0)

    @property
    def ratio(self) -> float:
        """upper / lower，用于观察夹逼不等式的紧性；lower 为 0 时返回 inf"""
        if self.lower == 0.0:
            return 1.0 if self.upper == 0.0 else float("inf")
        return self.upper / self.lower

    def contains(self, value: float, tol: float = CONSISTENCY_TOL) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": float(self.lower),
            "upper": float(self.upper),
            "exact": bool(self.exact),
            "lower_source": self.lower_source,
            "upper_source": self.upper_source,
        }
