#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 离散化基础

空间与时间共用同一步长 h = T/M 的均匀特征网格，
以及定义在网格上的矩阵值/向量值采样函数、梯形求积与对角线求导。

设计模式:
- 值对象模式（不可变数据类）
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import InvalidInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpaceTimeGrid:
    """
    均匀特征网格

    空间节点 x_i = i·h (i = 0..M)，时间节点 t_j = j·h (j = 0..2M)。

    Attributes:
        N (int): 控制维数
        T (float): 时间视界
        M (int): 步数
    """

    N: int
    T: float
    M: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidInputError(f"N 必须为正整数，实际为 {self.N}")
        if int(self.M) != self.M or self.M < 1:
            raise InvalidInputError(f"M 必须为正整数，实际为 {self.M}")
        if not np.isfinite(self.T) or self.T <= 0:
            raise InvalidInputError(f"T 必须为正实数，实际为 {self.T}")
        object.__setattr__(self, 'N', int(self.N))
        object.__setattr__(self, 'M', int(self.M))
        object.__setattr__(self, 'T', float(self.T))

    @property
    def h(self) -> float:
        return self.T / self.M

    @property
    def space_nodes(self) -> np.ndarray:
        return np.arange(self.M + 1) * self.h

    @property
    def time_nodes(self) -> np.ndarray:
        return np.arange(2 * self.M + 1) * self.h

    def node(self, index: int) -> float:
        return index * self.h

    def coarsen(self, stride: int) -> 'SpaceTimeGrid':
        """
        按步长抽取得到粗网格

        Args:
            stride (int): 抽取步长，必须整除 M

        Returns:
            SpaceTimeGrid: M/stride 步的网格
        """
        if stride < 1 or self.M % stride:
            raise InvalidInputError(f"stride={stride} 不能整除 M={self.M}")
        return SpaceTimeGrid(self.N, self.T, self.M // stride)


def trapezoid_weights(count: int, h: float) -> np.ndarray:
    """
    复合梯形权重

    Args:
        count (int): 节点数
        h (float): 步长

    Returns:
        np.ndarray: 端点 h/2、内部 h；单个节点的区间长度为零，权重为 0
    """
    if count < 1:
        raise InvalidInputError("梯形权重至少需要一个节点")
    weights = np.full(count, h, dtype=float)
    if count == 1:
        weights[0] = 0.0
    else:
        weights[0] = weights[-1] = 0.5 * h
    return weights


@dataclass(frozen=True, eq=False)
class MatrixFunction1D:
    """
    采样的 N×N 矩阵值函数

    Ω^T 上的函数有 M+1 个样本，[0, 2T] 上的函数有 2M+1 个样本。
    """

    grid: SpaceTimeGrid
    samples: np.ndarray
    domain_length: int = field(default=-1)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        N = self.grid.N
        if samples.ndim == 1 and N == 1:
            samples = samples.reshape(-1, 1, 1)
        if samples.ndim != 3 or samples.shape[1:] != (N, N):
            raise InvalidInputError(f"样本形状应为 (n, {N}, {N})，实际为 {samples.shape}")
        if samples.shape[0] == 0:
            raise InvalidInputError("样本数组为空")
        length = samples.shape[0] if self.domain_length < 0 else self.domain_length
        if samples.shape[0] != length:
            raise InvalidInputError(f"样本数 {samples.shape[0]} 与声明的节点数 {length} 不符")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("样本含有非有限值")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'domain_length', length)

    @classmethod
    def on_space(cls, grid: SpaceTimeGrid, samples) -> 'MatrixFunction1D':
        return cls(grid, samples, grid.M + 1)

    @classmethod
    def on_time(cls, grid: SpaceTimeGrid, samples) -> 'MatrixFunction1D':
        return cls(grid, samples, 2 * grid.M + 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.domain_length) * self.grid.h

    def transpose(self) -> 'MatrixFunction1D':
        return MatrixFunction1D(self.grid, np.swapaxes(self.samples, 1, 2), self.domain_length)


@dataclass(frozen=True, eq=False)
class Control:
    """
    [0, T] 上的 ℝ^N 值边界控制，M+1 个样本
    """

    grid: SpaceTimeGrid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim == 1 and self.grid.N == 1:
            samples = samples.reshape(-1, 1)
        if samples.shape != (self.grid.M + 1, self.grid.N):
            raise InvalidInputError(
                f"控制样本形状应为 ({self.grid.M + 1}, {self.grid.N})，实际为 {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("控制样本含有非有限值")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    def vector(self) -> np.ndarray:
        """按时间优先的块布局展开为长度 N·(M+1) 的向量"""
        return self.samples.reshape(-1).copy()

    def is_delayed(self, xi_steps: int) -> bool:
        """是否属于 ℱ^{T,ξ}，即 t_j < T−ξ 处恒为零"""
        return not np.any(self.samples[: self.grid.M - xi_steps])


def cumulative_integral(f: MatrixFunction1D) -> MatrixFunction1D:
    """
    复合梯形累积积分 F(t_k) = ∫_0^{t_k} f

    Args:
        f (MatrixFunction1D): 均匀网格上的采样函数

    Returns:
        MatrixFunction1D: F(t_0) = 0 的累积积分
    """
    if f.samples.shape[0] == 0:
        raise InvalidInputError("不能对空样本求积分")
    values = cumulative_trapezoid(f.samples, dx=f.grid.h, axis=0, initial=0.0)
    return MatrixFunction1D(f.grid, values, f.domain_length)


def diagonal_derivative(d: np.ndarray, h: float, grid: Optional[SpaceTimeGrid] = None) -> MatrixFunction1D:
    """
    对角线样本的二阶导数近似

    内部节点中心差分，两端二阶单侧差分，对二次函数精确。

    Args:
        d (np.ndarray): 形状 (n, N, N) 的对角线样本
        h (float): 步长
        grid (Optional[SpaceTimeGrid]): 结果所在网格，缺省时按样本数构造 T = (n-1)h 的网格

    Returns:
        MatrixFunction1D: 导数样本
    """
    d = np.asarray(d, dtype=float)
    if d.ndim == 1:
        d = d.reshape(-1, 1, 1)
    if d.shape[0] < 3:
        raise InvalidInputError(f"对角线求导至少需要 3 个样本，实际为 {d.shape[0]}")
    derivative = np.gradient(d, h, axis=0, edge_order=2)
    if grid is None:
        grid = SpaceTimeGrid(d.shape[1], (d.shape[0] - 1) * h, d.shape[0] - 1)
    return MatrixFunction1D(grid, derivative, d.shape[0])


__all__ = [
    'SpaceTimeGrid',
    'MatrixFunction1D',
    'Control',
    'trapezoid_weights',
    'cumulative_integral',
    'diagonal_derivative',
]
