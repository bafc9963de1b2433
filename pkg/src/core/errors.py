#!/usr/bin/env python3
"""
异常定义 - 双二次张量工具包的统一错误层次
输入类错误对应命令行退出码 1，数值类错误对应退出码 2
"""

from typing import Any, Optional


class BiquadError(Exception):
    """工具包所有异常的根类"""


class InvalidInputError(BiquadError, ValueError):
    """输入数据不合法（形状、对称性、格式）"""


class DimensionMismatch(InvalidInputError):
    """维度不匹配"""


class DimensionTooLarge(InvalidInputError):
    """超出暴力枚举允许的规模"""


class SymmetryViolation(InvalidInputError):
    """张量不满足双二次对称性"""

    def __init__(self, max_deviation: float, message: Optional[str] = None):
        self.max_deviation = float(max_deviation)
        super().__init__(message or f"双二次对称性被破坏，最大偏差: {self.max_deviation:.6g}")


class NumericalError(BiquadError, ArithmeticError):
    """数值计算失败"""


class ConvergenceFailure(NumericalError):
    """迭代未在上限内收敛，best 保存当前最优迭代结果"""

    def __init__(self, message: str, best: Any = None):
        self.best = best
        super().__init__(message)


class RankDeficient(NumericalError):
    """矩阵列秩不足，无法求左伪逆"""


class SingularFlattening(NumericalError):
    """方阵展开 M(A) 奇异或条件数过大"""


class NotInvertibleInBQ(NumericalError):
    """M(A) 可逆，但其逆折叠回去不是双二次张量"""

    def __init__(self, max_deviation: float):
        self.max_deviation = float(max_deviation)
        super().__init__(f"M(A) 的逆矩阵无法折叠为双二次张量，对称偏差: {self.max_deviation:.6g}")


class IntervalInconsistency(NumericalError):
    """下界超过上界，说明内部计算有缺陷"""
