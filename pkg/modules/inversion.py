#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 反问题: 由响应函数重建势

流程: 由 r 组装连接算子族 {C^ξ}，经振幅公式或预解式公式得到控制算子 W^T 的核 w，
最后 V(x) = −2 d w(x,x)/dx。

两条路径:
- resolvent（缺省）: 每个 ξ 解一次转置系统得到预解核的第 0 行，
  w(x,s) = C^T(T−x, T−s) − ∫_0^x l^x(0,η) C^T(η+T−x, T−s) dη
- amplitude: 读取斜投影 𝒫^{T,ξ} 在连接节点 T−ξ 处的行，
  乘以连接节点修正 (I − c_ξ)^{-1}，与 resolvent 路径在舍入误差内一致

逐 ξ 计算互相独立，使用线程池并按 ξ 顺序汇总。

设计模式:
- 策略模式（恢复路径）
- 模板方法模式（逐 ξ 扫描 + 汇总）
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import lu_solve

import config
from .errors import CharacterizationFailure, GridTooCoarseError, InvalidInputError, SingularOperatorError
from .forward import ResponseFunction, TransmutationKernel
from .grid_core import MatrixFunction1D, SpaceTimeGrid, diagonal_derivative, trapezoid_weights
from .operator_calculus import (
    ControlSpaceOperator,
    antiderivative,
    build_connecting,
    connecting_kernel,
    factorize,
    shortened_connecting,
)

logger = logging.getLogger(__name__)

RECOVERY_METHODS = ('resolvent', 'amplitude')


@dataclass(frozen=True)
class XiDiagnostic:
    """单个 ξ 的求解诊断"""

    xi_steps: int
    xi: float
    rcond: float
    det_sign: float
    log_abs_det: float

    def to_dict(self) -> Dict[str, float]:
        return {
            'xi': self.xi,
            'xi_steps': self.xi_steps,
            'rcond': self.rcond,
            'det_sign': self.det_sign,
            'log_abs_det': self.log_abs_det,
        }


@dataclass(frozen=True, eq=False)
class ResolventRow:
    """预解核的第 0 行 l^x(0, η_j)，η_j ∈ [0, x]，k+1 个样本"""

    x_index: int
    samples: np.ndarray


@dataclass(frozen=True, eq=False)
class RecoveredPotential:
    """
    重建的势

    Attributes:
        grid (SpaceTimeGrid): 结果所在网格（stride > 1 时为粗网格）
        samples (np.ndarray): V̂(x_i)，M+1 个样本
        method (str): 'amplitude' 或 'resolvent'
        diagnostics (List[XiDiagnostic]): 逐 ξ 的 rcond 等诊断
    """

    grid: SpaceTimeGrid
    samples: np.ndarray
    method: str
    diagnostics: List[XiDiagnostic] = field(default_factory=list)

    def __post_init__(self):
        function = MatrixFunction1D.on_space(self.grid, self.samples)
        object.__setattr__(self, 'samples', function.samples)

    def as_function(self) -> MatrixFunction1D:
        return MatrixFunction1D.on_space(self.grid, self.samples)


@dataclass
class _RowResult:
    k: int
    values: Optional[np.ndarray]
    diagonal: Optional[np.ndarray]
    diagnostic: XiDiagnostic
    W_row: Optional[np.ndarray] = None
    resolvent: Optional[ResolventRow] = None
    failed: bool = False


class _RecoveryContext:
    """一次恢复共享的只读数据: R、C^T 及其核"""

    def __init__(self, r: ResponseFunction, rcond_threshold: Optional[float]):
        self.r = r
        self.grid = r.grid
        self.rcond_threshold = config.RCOND_THRESHOLD if rcond_threshold is None else rcond_threshold
        self.R = antiderivative(r)
        self.K_T = connecting_kernel(self.R, self.grid.M)
        self.C_T = build_connecting(r, self.grid.M, self.R)
        self.weights_T = trapezoid_weights(self.grid.M + 1, self.grid.h)

    def failed_row(self, k: int, error: SingularOperatorError) -> _RowResult:
        diagnostic = XiDiagnostic(k, self.grid.node(k), float(error.rcond), float('nan'), float('nan'))
        return _RowResult(k, None, None, diagnostic, failed=True)


def _resolvent_row(ctx: _RecoveryContext, k: int) -> _RowResult:
    """
    x = k·h 一行: 解 C^x 的转置系统得到 y = (LΩ)(0,:)，再按预解式公式求 w(x_k, ·)
    """
    grid = ctx.grid
    M, N = grid.M, grid.N
    C = build_connecting(ctx.r, k, ctx.R)
    try:
        lu_piv, info = factorize(C, ctx.rcond_threshold, singular_values=False)
    except SingularOperatorError as error:
        return ctx.failed_row(k, error)

    # y C^x = (KΩ)(0,:)  ⇔  (C^x)^T y^T = (KΩ)(0,:)^T
    K = connecting_kernel(ctx.R, k)
    omega = C.weights_in
    rhs = np.swapaxes(K[0] * omega[:, None, None], 1, 2).reshape((k + 1) * N, N)
    solution = lu_solve(lu_piv, rhs, trans=1)
    y = np.swapaxes(solution.reshape(k + 1, N, N), 1, 2)

    # w(x_k, T − t_m)，m = 0..M−k
    rows = ctx.K_T[M - k:, : M - k + 1]
    values = ctx.K_T[M - k, : M - k + 1] - np.einsum('eab,embc->mac', y, rows)
    diagnostic = XiDiagnostic(k, grid.node(k), info.rcond, info.det_sign, info.log_abs_det)
    resolvent = ResolventRow(k, y / omega[:, None, None])
    return _RowResult(k, values, values[M - k], diagnostic, resolvent=resolvent)


def _amplitude_row(ctx: _RecoveryContext, k: int) -> _RowResult:
    """
    x = k·h 一行: (W f)(ξ) = (I − c_ξ)^{-1} (𝒫^{T,ξ} f)(T−ξ)

    c_ξ = δ·[C'^ξ⁻¹ K(·, 0)](0)，δ 为连接节点在 ℱ^T 与 ℱ^ξ 中的权重差。
    """
    grid = ctx.grid
    M, N, h = grid.M, grid.N, grid.h
    short = shortened_connecting(ctx.C_T, k)
    try:
        lu_piv, info = factorize(short, ctx.rcond_threshold, singular_values=False)
    except SingularOperatorError as error:
        return ctx.failed_row(k, error)

    start = (M - k) * N
    E0 = np.zeros(((k + 1) * N, N))
    E0[:N] = np.eye(N)
    first_row = lu_solve(lu_piv, E0, trans=1).T
    junction_column = ctx.K_T[M - k:, M - k].reshape((k + 1) * N, N)
    c = first_row @ junction_column
    delta = ctx.weights_T[M - k] - trapezoid_weights(k + 1, h)[0]
    correction = np.linalg.inv(np.eye(N) - delta * c)
    W_row = correction @ (first_row @ ctx.C_T.matrix[start:, :])

    # 核提取: 列 m 对应 s = T − t_m，除以 [x_k, T] 上的梯形权重
    blocks = W_row.reshape(N, M + 1, N).transpose(1, 0, 2)[: M - k + 1]
    column_weights = trapezoid_weights(M - k + 1, h)[::-1]
    values = np.empty_like(blocks)
    if k < M:
        values[: M - k] = blocks[: M - k] / column_weights[: M - k, None, None]
        values[M - k] = (blocks[M - k] - np.eye(N)) / column_weights[M - k]
    else:
        values[0] = correction @ c
    diagnostic = XiDiagnostic(k, grid.node(k), info.rcond, info.det_sign, info.log_abs_det)
    return _RowResult(k, values, values[M - k], diagnostic, W_row=W_row)


def _sweep_rows(ctx: _RecoveryContext, steps: Sequence[int],
                row: Callable[[_RecoveryContext, int], _RowResult],
                workers: Optional[int]) -> List[_RowResult]:
    """
    并行计算各 ξ 行并按 ξ 顺序检查

    det C^0 = 1，因此 det C^ξ < 0 说明 (0, ξ] 内已经变号；rcond 过小或 det C^ξ < 0 都判为失败，
    报告最小的失败 ξ。
    """
    workers = config.PARALLEL_WORKERS if workers is None else workers
    if workers > 1 and len(steps) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda k: row(ctx, k), steps))
    else:
        results = [row(ctx, k) for k in steps]

    for index, result in enumerate(results):
        diagnostics = [item.diagnostic for item in results[: index + 1]]
        if result.failed:
            logger.warning("ξ=%.6g 处 rcond=%.3e 低于阈值", result.diagnostic.xi, result.diagnostic.rcond)
            raise CharacterizationFailure(result.diagnostic.xi, result.diagnostic.rcond, diagnostics, 'rcond')
        if result.diagnostic.det_sign < 0:
            logger.warning("ξ=%.6g 处 det C^ξ 变号", result.diagnostic.xi)
            raise CharacterizationFailure(result.diagnostic.xi, result.diagnostic.rcond, diagnostics, 'det_sign')
    return results


def _sweep_steps(grid: SpaceTimeGrid, stride: int) -> List[int]:
    if int(stride) != stride or stride < 1:
        raise InvalidInputError(f"stride 必须为正整数，实际为 {stride}")
    if grid.M % stride:
        raise InvalidInputError(f"stride={stride} 不能整除 M={grid.M}，拒绝插值")
    return list(range(stride, grid.M + 1, stride))


def _assemble_kernel(grid: SpaceTimeGrid, results: List[_RowResult], stride: int) -> TransmutationKernel:
    """把逐行结果放到（粗）网格的控制三角形上"""
    coarse = grid.coarsen(stride)
    M, Mc, N = grid.M, coarse.M, grid.N
    values = np.zeros((Mc + 1, Mc + 1, N, N))
    for result in results:
        kc = result.k // stride
        lc = np.arange(kc, Mc + 1)
        m = M - lc * stride
        values[kc, lc] = result.values[m]
    return TransmutationKernel(coarse, values, Mc)


def _check_response(r: ResponseFunction, grid: Optional[SpaceTimeGrid]) -> SpaceTimeGrid:
    if grid is not None and grid != r.grid:
        raise InvalidInputError(f"响应函数网格 {r.grid} 与给定网格 {grid} 不一致")
    return r.grid


def recover_kernel_resolvent(r: ResponseFunction, grid: Optional[SpaceTimeGrid] = None, stride: int = 1,
                             rcond_threshold: Optional[float] = None, workers: Optional[int] = None,
                             ) -> Tuple[TransmutationKernel, List[XiDiagnostic]]:
    """
    预解式路径恢复控制三角形 0 ≤ x ≤ s ≤ T 上的核

    Args:
        r (ResponseFunction): [0, 2T] 上的响应函数
        grid (Optional[SpaceTimeGrid]): 网格（须与 r 一致）
        stride (int): ξ 扫描步长，必须整除 M
        rcond_threshold (Optional[float]): 奇异判定阈值
        workers (Optional[int]): 线程数

    Returns:
        Tuple[TransmutationKernel, List[XiDiagnostic]]: 核与逐 ξ 诊断

    Raises:
        CharacterizationFailure: 某个 C^x 奇异或行列式变号
    """
    grid = _check_response(r, grid)
    steps = _sweep_steps(grid, stride)
    ctx = _RecoveryContext(r, rcond_threshold)
    results = _sweep_rows(ctx, steps, _resolvent_row, workers)
    return _assemble_kernel(grid, results, stride), [item.diagnostic for item in results]


def resolvent_rows(r: ResponseFunction, steps: Sequence[int],
                   rcond_threshold: Optional[float] = None) -> List[ResolventRow]:
    """给定若干 x 步数，返回预解核第 0 行"""
    ctx = _RecoveryContext(r, rcond_threshold)
    results = _sweep_rows(ctx, list(steps), _resolvent_row, 1)
    return [item.resolvent for item in results]


def recover_W_amplitude(r: ResponseFunction, grid: Optional[SpaceTimeGrid] = None,
                        rcond_threshold: Optional[float] = None, workers: Optional[int] = None,
                        junction_correction: bool = True,
                        ) -> Tuple[ControlSpaceOperator, TransmutationKernel, List[XiDiagnostic]]:
    """
    振幅公式逐行组装 W^T: ℱ^T → 𝓗^T，并提取核

    第 ξ 行为投影 𝒫^{T,ξ} 在节点 M−k（右极限节点）处的行，
    乘以连接节点修正后即为 (W^T f)(ξ)。

    Args:
        r (ResponseFunction): 响应函数
        grid (Optional[SpaceTimeGrid]): 网格
        rcond_threshold (Optional[float]): 奇异判定阈值
        workers (Optional[int]): 线程数
        junction_correction (bool): False 时直接读取投影值，对角线由非对角列外推（W 与核均为一阶精度）

    Returns:
        tuple: (W 算子, 控制三角形上的核, 逐 ξ 诊断)
    """
    grid = _check_response(r, grid)
    M, N = grid.M, grid.N
    ctx = _RecoveryContext(r, rcond_threshold)
    row = _amplitude_row if junction_correction else _uncorrected_amplitude_row
    started = time.perf_counter()
    results = _sweep_rows(ctx, list(range(1, M + 1)), row, workers)

    matrix = np.zeros(((M + 1) * N, (M + 1) * N))
    matrix[:N, M * N:] = np.eye(N)
    for result in results:
        matrix[result.k * N:(result.k + 1) * N] = result.W_row
    weights = ctx.weights_T
    W = ControlSpaceOperator(grid, M, matrix, weights, weights, "W")
    kernel = _assemble_kernel(grid, results, 1)
    logger.info("振幅公式组装 W 完成: M=%d, 用时 %.3fs", M, time.perf_counter() - started)
    return W, kernel, [item.diagnostic for item in results]


def _extrapolate_diagonal(columns: np.ndarray) -> np.ndarray:
    """由对角线前的等距列（最后一列离对角线最近）外推对角值"""
    if len(columns) >= 3:
        return 3.0 * columns[-1] - 3.0 * columns[-2] + columns[-3]
    if len(columns) == 2:
        return 2.0 * columns[-1] - columns[-2]
    return columns[-1].copy()


def _uncorrected_amplitude_row(ctx: _RecoveryContext, k: int) -> _RowResult:
    """
    不做连接节点修正的振幅读取

    非对角列与 W 都是一阶精度。对角块的投影值含 O(1) 的连接节点误差，
    因此对角线改由相邻非对角列二次外推 (3v₁ − 3v₂ + v₃)，列数不足时降为线性或常数外推。
    """
    grid = ctx.grid
    M, N, h = grid.M, grid.N, grid.h
    short = shortened_connecting(ctx.C_T, k)
    try:
        lu_piv, info = factorize(short, ctx.rcond_threshold, singular_values=False)
    except SingularOperatorError as error:
        return ctx.failed_row(k, error)
    E0 = np.zeros(((k + 1) * N, N))
    E0[:N] = np.eye(N)
    first_row = lu_solve(lu_piv, E0, trans=1).T
    W_row = first_row @ ctx.C_T.matrix[(M - k) * N:, :]
    blocks = W_row.reshape(N, M + 1, N).transpose(1, 0, 2)[: M - k + 1]
    column_weights = trapezoid_weights(M - k + 1, h)[::-1]
    values = np.empty_like(blocks)
    if k < M:
        values[: M - k] = blocks[: M - k] / column_weights[: M - k, None, None]
        values[M - k] = _extrapolate_diagonal(values[: M - k])
    else:
        values[0] = first_row @ ctx.K_T[:, 0].reshape((M + 1) * N, N)
    diagnostic = XiDiagnostic(k, grid.node(k), info.rcond, info.det_sign, info.log_abs_det)
    return _RowResult(k, values, values[M - k], diagnostic, W_row=W_row)


def _recover_kernel_amplitude(r: ResponseFunction, stride: int, rcond_threshold: Optional[float],
                              workers: Optional[int]) -> Tuple[TransmutationKernel, List[XiDiagnostic]]:
    grid = r.grid
    steps = _sweep_steps(grid, stride)
    ctx = _RecoveryContext(r, rcond_threshold)
    results = _sweep_rows(ctx, steps, _amplitude_row, workers)
    return _assemble_kernel(grid, results, stride), [item.diagnostic for item in results]


def potential_from_kernel(w: TransmutationKernel, method: str = 'kernel',
                          diagnostics: Optional[List[XiDiagnostic]] = None) -> RecoveredPotential:
    """
    V̂(x_i) = −2 · d w(x_i, x_i)/dx

    Args:
        w (TransmutationKernel): 对角线已知的核
        method (str): 写入结果的路径标签
        diagnostics (Optional[List[XiDiagnostic]]): 随结果保存的诊断

    Returns:
        RecoveredPotential: M+1 个样本
    """
    grid = w.grid
    if grid.M < 2:
        raise GridTooCoarseError(grid.M, 2)
    derivative = diagonal_derivative(w.diagonal(), grid.h, grid)
    return RecoveredPotential(grid, -2.0 * derivative.samples, method, list(diagnostics or []))


def invert_response(r: ResponseFunction, grid: Optional[SpaceTimeGrid] = None,
                    method: str = config.DEFAULT_METHOD, stride: int = 1,
                    rcond_threshold: Optional[float] = None,
                    workers: Optional[int] = None) -> RecoveredPotential:
    """
    由 [0, 2T] 上的响应函数重建 Ω^T 上的势

    Args:
        r (ResponseFunction): 响应函数
        grid (Optional[SpaceTimeGrid]): 网格（须与 r 一致）
        method (str): 'resolvent' 或 'amplitude'
        stride (int): ξ 扫描步长；>1 时结果位于 M/stride 步的粗网格
        rcond_threshold (Optional[float]): 奇异判定阈值
        workers (Optional[int]): 线程数

    Returns:
        RecoveredPotential: 重建的势与逐 ξ 诊断

    Raises:
        CharacterizationFailure: 最小的失败 ξ
    """
    grid = _check_response(r, grid)
    if method not in RECOVERY_METHODS:
        raise InvalidInputError(f"未知的恢复方法: {method}，可选 {RECOVERY_METHODS}")
    started = time.perf_counter()
    if method == 'resolvent':
        kernel, diagnostics = recover_kernel_resolvent(r, grid, stride, rcond_threshold, workers)
    else:
        kernel, diagnostics = _recover_kernel_amplitude(r, stride, rcond_threshold, workers)
    potential = potential_from_kernel(kernel, method, diagnostics)
    logger.info("反问题完成: method=%s, M=%d, stride=%d, 最小 rcond=%.3e, 用时 %.3fs",
                method, grid.M, stride, min(item.rcond for item in diagnostics),
                time.perf_counter() - started)
    return potential


__all__ = [
    'RECOVERY_METHODS',
    'XiDiagnostic',
    'ResolventRow',
    'RecoveredPotential',
    'recover_kernel_resolvent',
    'resolvent_rows',
    'recover_W_amplitude',
    'potential_from_kernel',
    'invert_response',
]
