#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 正问题求解器

由势 V 求解矩阵 Goursat 问题得到变换核 w，再取 r(t) = w_x(0, t) 作为响应函数，
并通过表示公式 u^f(x,t) = f(t−x) + ∫_x^t w(x,s) f(t−s) ds 计算波场。

特征坐标约定: a = t + x, b = t − x，格点 a = p·h, b = q·h，
0 ≤ q ≤ p ≤ 2M。网格节点 (x_i, t_j) 对应格点 (p, q) = (i+j, j−i)；
p − q 为奇数的格点位于半步空间位置 x = (p−q)h/2。

设计模式:
- 值对象模式
- 模板方法模式（逐层推进）
"""

import logging
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import i1, j1

from .errors import GridTooCoarseError, IllPosedStepError, InvalidInputError
from .grid_core import Control, MatrixFunction1D, SpaceTimeGrid, cumulative_integral, trapezoid_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TransmutationKernel:
    """
    特征三角形上的变换核 w(x_i, t_j)

    存储下标满足 i ≤ j ≤ min(time_steps, 2M − i)，其余位置为零且不可读取。

    Attributes:
        grid (SpaceTimeGrid): 网格
        values (np.ndarray): 形状 (M+1, time_steps+1, N, N)
        time_steps (int): 2M 表示扩展三角形，M 表示控制三角形 0 ≤ x ≤ s ≤ T
    """

    grid: SpaceTimeGrid
    values: np.ndarray
    time_steps: int

    def __post_init__(self):
        M, N = self.grid.M, self.grid.N
        expected = (M + 1, self.time_steps + 1, N, N)
        if self.values.shape != expected:
            raise InvalidInputError(f"核数组形状应为 {expected}，实际为 {self.values.shape}")
        self.values.setflags(write=False)

    def contains(self, i: int, j: int) -> bool:
        return 0 <= i <= self.grid.M and i <= j <= min(self.time_steps, 2 * self.grid.M - i)

    def at(self, i: int, j: int) -> np.ndarray:
        if not self.contains(i, j):
            raise InvalidInputError(f"节点 ({i}, {j}) 不在核的定义三角形内")
        return self.values[i, j]

    def diagonal(self) -> np.ndarray:
        idx = np.arange(self.grid.M + 1)
        return self.values[idx, idx]

    def mask(self) -> np.ndarray:
        """定义三角形的布尔掩码，形状 (M+1, time_steps+1)"""
        i = np.arange(self.grid.M + 1)[:, None]
        j = np.arange(self.time_steps + 1)[None, :]
        return (j >= i) & (j <= 2 * self.grid.M - i)

    def control_triangle(self) -> 'TransmutationKernel':
        """限制到 0 ≤ x ≤ s ≤ T"""
        values = np.array(self.values[:, : self.grid.M + 1])
        i = np.arange(self.grid.M + 1)[:, None]
        j = np.arange(self.grid.M + 1)[None, :]
        values[~(j >= i)] = 0.0
        return TransmutationKernel(self.grid, values, self.grid.M)


@dataclass(frozen=True, eq=False)
class ResponseFunction:
    """[0, 2T] 上的响应函数 r(t_j)，2M+1 个样本"""

    grid: SpaceTimeGrid
    samples: np.ndarray

    def __post_init__(self):
        function = MatrixFunction1D.on_time(self.grid, self.samples)
        object.__setattr__(self, 'samples', function.samples)

    def as_function(self) -> MatrixFunction1D:
        return MatrixFunction1D.on_time(self.grid, self.samples)

    def transpose(self) -> 'ResponseFunction':
        return ResponseFunction(self.grid, np.swapaxes(self.samples, 1, 2))

    @classmethod
    def zeros(cls, grid: SpaceTimeGrid) -> 'ResponseFunction':
        return cls(grid, np.zeros((2 * grid.M + 1, grid.N, grid.N)))


@dataclass(frozen=True, eq=False)
class WaveField:
    """时刻 t_j 的波场快照 u(x_i)，x_i ∈ Ω^T"""

    grid: SpaceTimeGrid
    time_index: int
    samples: np.ndarray

    @property
    def t(self) -> float:
        return self.grid.node(self.time_index)


def _half_step_data(V: MatrixFunction1D):
    """
    半步空间位置上的势与对角线数据

    Returns:
        tuple: (V_half, F_half)，下标 k 对应 x = k·h/2，k = 0..2M
    """
    grid = V.grid
    h = grid.h
    M = grid.M
    samples = V.samples
    V_half = np.empty((2 * M + 1,) + samples.shape[1:])
    V_half[0::2] = samples
    V_half[1::2] = 0.5 * (samples[:-1] + samples[1:])

    F = cumulative_integral(V).samples
    F_half = np.empty_like(V_half)
    F_half[0::2] = F
    F_half[1::2] = F[:-1] + 0.25 * h * (samples[:-1] + V_half[1::2])
    return V_half, F_half


def _corner_inverses(V_half: np.ndarray, h: float) -> np.ndarray:
    """预先求出每个半步位置上的 (I + (h²/8)V)^{-1}"""
    N = V_half.shape[1]
    A = np.eye(N) + (h * h / 8.0) * V_half
    inverses = np.empty_like(A)
    for k in range(1, A.shape[0]):
        if not np.all(np.isfinite(A[k])):
            raise IllPosedStepError((k, 0), 0.5 * k * h)
        try:
            inverses[k] = np.linalg.inv(A[k])
        except np.linalg.LinAlgError:
            raise IllPosedStepError((k, 0), 0.5 * k * h)
        if np.linalg.cond(A[k]) > 1.0 / np.finfo(float).eps:
            raise IllPosedStepError((k, 0), 0.5 * k * h)
    inverses[0] = np.eye(N)
    return inverses


def solve_goursat(V: MatrixFunction1D, grid: SpaceTimeGrid) -> TransmutationKernel:
    """
    在扩展三角形 0 ≤ x ≤ t ≤ 2T − x 上求解矩阵 Goursat 问题

    w_tt − w_xx + V w = 0，w(x, x) = −½∫_0^x V，w(0, t) = 0。
    在特征坐标中 4 w_ab = −V w；盒格式
    w_NE = (I + (h²/8)V)^{-1} (w_E + w_W − w_S − (h²/8) V w_S)，
    其中 V 取在单元中心，w_mid = ½(w_S + w_NE)。
    同一反对角线 p + q = s 上的格点互相独立，按层向量化推进。

    Args:
        V (MatrixFunction1D): Ω^T 上的势，M+1 个样本
        grid (SpaceTimeGrid): 网格

    Returns:
        TransmutationKernel: 扩展三角形上的核
    """
    if V.domain_length != grid.M + 1 or V.grid.N != grid.N:
        raise InvalidInputError(f"势必须有 {grid.M + 1} 个 {grid.N}×{grid.N} 样本")
    started = time.perf_counter()
    M, N, h = grid.M, grid.N, grid.h
    V_half, F_half = _half_step_data(MatrixFunction1D.on_space(grid, V.samples))
    inverses = _corner_inverses(V_half, h)
    scale = h * h / 8.0

    values = np.zeros((M + 1, 2 * M + 1, N, N))
    prev2 = np.zeros((2 * M + 1, N, N))
    prev1 = np.zeros((2 * M + 1, N, N))

    for s in range(1, 4 * M + 1):
        level = np.zeros((2 * M + 1, N, N))
        if s <= 2 * M:
            level[0] = -0.5 * F_half[s]
        q_lo = max(1, s - 2 * M)
        q_hi = (s - 1) // 2
        if q_hi >= q_lo:
            q = np.arange(q_lo, q_hi + 1)
            k = s - 2 * q
            west = prev1[q]
            east = prev1[q - 1]
            south = prev2[q - 1]
            rhs = east + west - south - scale * np.matmul(V_half[k], south)
            level[q] = np.matmul(inverses[k], rhs)
        if s % 2 == 0:
            j = s // 2
            i = np.arange(0, min(j, 2 * M - j) + 1)
            values[i, j] = level[j - i]
        prev2, prev1 = prev1, level

    logger.debug("Goursat 推进完成: M=%d, N=%d, 用时 %.3fs", M, N, time.perf_counter() - started)
    return TransmutationKernel(grid, values, 2 * M)


def response_from_kernel(w: TransmutationKernel) -> ResponseFunction:
    """
    r(t_j) = (4 w(x_1, t_j) − w(x_2, t_j)) / (2h)

    模板对 j = 2..2M−2 有效，两端各两个节点用二次外推补齐。

    Args:
        w (TransmutationKernel): 扩展三角形上的核

    Returns:
        ResponseFunction: 2M+1 个样本
    """
    grid = w.grid
    M = grid.M
    if M < 3:
        raise GridTooCoarseError(M, 3)
    if w.time_steps < 2 * M:
        raise InvalidInputError("响应函数需要扩展三角形上的核")
    r = np.zeros((2 * M + 1, grid.N, grid.N))
    r[2: 2 * M - 1] = (4.0 * w.values[1, 2: 2 * M - 1] - w.values[2, 2: 2 * M - 1]) / (2.0 * grid.h)
    r[1] = 3.0 * r[2] - 3.0 * r[3] + r[4]
    r[0] = 3.0 * r[1] - 3.0 * r[2] + r[3]
    r[2 * M - 1] = 3.0 * r[2 * M - 2] - 3.0 * r[2 * M - 3] + r[2 * M - 4]
    r[2 * M] = 3.0 * r[2 * M - 1] - 3.0 * r[2 * M - 2] + r[2 * M - 3]
    return ResponseFunction(grid, r)


def forward_response(V: MatrixFunction1D, grid: SpaceTimeGrid) -> ResponseFunction:
    """由势计算 [0, 2T] 上的响应函数"""
    started = time.perf_counter()
    response = response_from_kernel(solve_goursat(V, grid))
    logger.info("正问题完成: N=%d, T=%g, M=%d, 用时 %.3fs",
                grid.N, grid.T, grid.M, time.perf_counter() - started)
    return response


def evaluate_wavefield(w: TransmutationKernel, f: Control, time_index: int) -> WaveField:
    """
    u(x_i) = f(t − x_i) + 梯形求积 ∫_{x_i}^{t} w(x_i, s) f(t − s) ds

    控制在负时间处按零延拓。

    Args:
        w (TransmutationKernel): 核
        f (Control): [0, T] 上的控制
        time_index (int): 时刻下标 j，0 ≤ j ≤ M

    Returns:
        WaveField: x_i > t 处恒为零
    """
    grid = w.grid
    M, N = grid.M, grid.N
    if int(time_index) != time_index or not 0 <= time_index <= M:
        raise InvalidInputError(f"时刻下标必须为 0..{M} 的整数，实际为 {time_index}")
    if f.grid.M != M or f.grid.N != N:
        raise InvalidInputError("控制与核的网格不一致")
    j = int(time_index)
    u = np.zeros((M + 1, N))
    for i in range(0, j + 1):
        s = np.arange(i, j + 1)
        weights = trapezoid_weights(s.size, grid.h)
        integrand = np.einsum('lab,lb->la', w.values[i, s], f.samples[j - s])
        u[i] = f.samples[j - i] + weights @ integrand
    return WaveField(grid, j, u)


def dual_potential(V: MatrixFunction1D) -> MatrixFunction1D:
    """对偶系统的势 V_♭(x) = V(x)^T"""
    return V.transpose()


def scalar_constant_kernel(q: float, x, t) -> np.ndarray:
    """
    N = 1、V ≡ q 时核的闭式解

    w(x, t) = −q x J1(kρ)/(kρ)，k = √q，ρ = √(t² − x²)；q < 0 时以 I1 代替 J1。

    Args:
        q (float): 常数势
        x: 空间坐标（可广播）
        t: 时间坐标（可广播）

    Returns:
        np.ndarray: 核值，t < x 处为零
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    rho = np.sqrt(np.clip(t * t - x * x, 0.0, None))
    z = np.sqrt(abs(q)) * rho
    safe = np.where(z > 1e-8, z, 1.0)
    bessel = j1(safe) if q >= 0 else i1(safe)
    ratio = np.where(z > 1e-8, bessel / safe, 0.5)
    return np.where(t >= x, -q * x * ratio, 0.0)


def scalar_constant_response(q: float, t) -> np.ndarray:
    """r(t) = w_x(0, t) = −q J1(√q t)/(√q t)"""
    t = np.asarray(t, dtype=float)
    z = np.sqrt(abs(q)) * t
    safe = np.where(z > 1e-8, z, 1.0)
    bessel = j1(safe) if q >= 0 else i1(safe)
    return -q * np.where(z > 1e-8, bessel / safe, 0.5)


__all__ = [
    'TransmutationKernel',
    'ResponseFunction',
    'WaveField',
    'solve_goursat',
    'response_from_kernel',
    'forward_response',
    'evaluate_wavefield',
    'dual_potential',
    'scalar_constant_kernel',
    'scalar_constant_response',
]
