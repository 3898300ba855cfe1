#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 异常层次

所有数值模块抛出的异常都继承自 InverseProblemError，
命令层 (BaseModule) 依据异常类型映射到进程退出码。

设计模式:
- 异常层次结构
"""

from typing import Any, List, Optional, Tuple


class InverseProblemError(Exception):
    """所有 WaveBC 异常的基类"""


class InvalidInputError(InverseProblemError, ValueError):
    """输入数据或参数不合法"""


class GridTooCoarseError(InvalidInputError):
    """网格步数不足以使用给定的差分模板"""

    def __init__(self, steps: int, required: int):
        super().__init__(f"网格过粗: M={steps}，至少需要 M>={required}")
        self.steps = steps
        self.required = required


class NumericalFailure(InverseProblemError, ArithmeticError):
    """内部数值失败"""


class IllPosedStepError(NumericalFailure):
    """
    Goursat 推进中某个单元的 N×N 修正矩阵奇异

    Attributes:
        cell (Tuple[int, int]): 特征格点 (p, q)
        x (float): 单元中心的空间坐标
    """

    def __init__(self, cell: Tuple[int, int], x: float):
        super().__init__(f"单元 {cell} (x={x:.6g}) 的修正矩阵 I + (h²/8)V 奇异")
        self.cell = cell
        self.x = x


class SingularOperatorError(NumericalFailure):
    """
    控制空间算子数值奇异

    Attributes:
        xi (Optional[float]): 算子所在的 ξ
        rcond (float): 倒条件数估计
    """

    def __init__(self, xi: Optional[float], rcond: float, message: Optional[str] = None):
        if message is None:
            where = "" if xi is None else f" (ξ={xi:.17g})"
            message = f"算子数值奇异{where}: rcond={rcond:.3e}"
        super().__init__(message)
        self.xi = xi
        self.rcond = rcond


class CharacterizationFailure(SingularOperatorError):
    """
    某个 C^ξ 不是同构: 数据不满足刻画条件

    Attributes:
        xi (float): 最小的失败 ξ
        diagnostics (List[Any]): 失败前已完成的逐 ξ 诊断记录
        reason (str): 'rcond' 或 'det_sign'
    """

    def __init__(self, xi: float, rcond: float, diagnostics: List[Any], reason: str = 'rcond'):
        if reason == 'det_sign':
            detail = "det C^ξ 变号，区间内存在奇异点"
        else:
            detail = f"rcond={rcond:.3e}"
        super().__init__(xi, rcond, f"刻画条件在 ξ={xi:.17g} 处失败: {detail}")
        self.diagnostics = list(diagnostics)
        self.reason = reason


__all__ = [
    'InverseProblemError',
    'InvalidInputError',
    'GridTooCoarseError',
    'NumericalFailure',
    'IllPosedStepError',
    'SingularOperatorError',
    'CharacterizationFailure',
]
