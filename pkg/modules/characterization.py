#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 数据刻画与算子恒等式诊断

r 是某个系统的响应函数当且仅当对每个 0 < ξ ≤ T，C^ξ 都是同构。
本模块在网格上扫描 ξ，记录带权共轭后 C^ξ 的极端奇异值、rcond 与行列式符号，
并把各算子恒等式作为数值残差报告:
- 三角分解 C^T = (Z_♭)* Z，Z = I^T W
- 缠绕关系 W 𝒫^{T,ξ} = Y^ξ W 与 C^T 𝒫 = (𝒫_♭)* C^T
- 对偶 r_♭ = r^T
- 自伴情形 C^T 正定
- 二阶导数关系 W d²/dt² = (d²/dx² − V) W

失败是报告结果而不是异常。

设计模式:
- 值对象模式（报告）
- 外观模式（完整检查）
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from .errors import InvalidInputError
from .forward import ResponseFunction, dual_potential, forward_response
from .grid_core import MatrixFunction1D, SpaceTimeGrid
from .inversion import invert_response, recover_W_amplitude
from .operator_calculus import (
    ControlSpaceOperator,
    antiderivative,
    build_connecting,
    build_projector,
    cutoff,
    factorize,
    flip_isometry,
    wave_cutoff,
    weight_conjugated,
    weighted_adjoint,
    weighted_norm,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRecord:
    """单个 ξ 的扫描记录"""

    xi_steps: int
    xi: float
    sigma_min: float
    sigma_max: float
    rcond: float
    kernel_norm: float
    log_abs_det: float
    det_sign: float
    sign_change: bool
    passed: bool

    @property
    def sigma_ratio(self) -> float:
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'xi': self.xi,
            'xi_steps': self.xi_steps,
            'sigma_min': self.sigma_min,
            'sigma_max': self.sigma_max,
            'rcond': self.rcond,
            'kernel_norm': self.kernel_norm,
            'log_abs_det': self.log_abs_det,
            'det_sign': self.det_sign,
            'sign_change': self.sign_change,
            'passed': self.passed,
        }


@dataclass(frozen=True)
class CharacterizationReport:
    """
    σ_min 扫描报告

    Attributes:
        grid (SpaceTimeGrid): 网格
        stride (int): 扫描步长
        threshold (float): 相对阈值，σ_min > threshold·σ_max 视为通过
        records (tuple): 按 ξ 排序的记录
    """

    grid: SpaceTimeGrid
    stride: int
    threshold: float
    records: tuple = field(default_factory=tuple)

    @property
    def verdict(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def argmin(self) -> SweepRecord:
        return min(self.records, key=lambda record: record.sigma_ratio)

    @property
    def first_failure(self) -> Optional[SweepRecord]:
        return next((record for record in self.records if not record.passed), None)

    @property
    def passes_at_T(self) -> bool:
        final = self.records[-1]
        return final.xi_steps == self.grid.M and final.sigma_min > self.threshold * final.sigma_max

    @property
    def sign_change_bracket(self) -> Optional[Tuple[float, float]]:
        """首个失败由行列式变号引起时，奇异点所在的区间 (ξ_prev, ξ]"""
        failure = self.first_failure
        if failure is None or not failure.sign_change:
            return None
        index = self.records.index(failure)
        lower = self.records[index - 1].xi if index > 0 else 0.0
        return lower, failure.xi

    def record_at(self, xi_steps: int) -> Optional[SweepRecord]:
        return next((record for record in self.records if record.xi_steps == xi_steps), None)

    def to_dict(self) -> Dict[str, Any]:
        failure = self.first_failure
        return {
            'kind': 'characterization',
            'N': self.grid.N,
            'T': self.grid.T,
            'M': self.grid.M,
            'stride': self.stride,
            'threshold': self.threshold,
            'verdict': 'pass' if self.verdict else 'fail',
            'argmin_xi': self.argmin.xi,
            'min_sigma_ratio': self.argmin.sigma_ratio,
            'first_failure_xi': None if failure is None else failure.xi,
            'sign_change_bracket': None if self.sign_change_bracket is None else list(self.sign_change_bracket),
            'passes_at_T': self.passes_at_T,
            'records': [record.to_dict() for record in self.records],
        }


def _sweep_steps(grid: SpaceTimeGrid, stride: int) -> List[int]:
    steps = list(range(stride, grid.M + 1, stride))
    if not steps or steps[-1] != grid.M:
        steps.append(grid.M)
    return steps


def sigma_min_sweep(r: ResponseFunction, stride: int = 1, threshold: Optional[float] = None,
                    workers: Optional[int] = None) -> CharacterizationReport:
    """
    扫描 ξ = stride·h, 2·stride·h, …, T，记录每个 C^ξ 的同构诊断

    Args:
        r (ResponseFunction): [0, 2T] 上的响应函数
        stride (int): 扫描步长（T 总被包含）
        threshold (Optional[float]): 相对阈值，缺省 config.SIGMA_RELATIVE_THRESHOLD
        workers (Optional[int]): 线程数

    Returns:
        CharacterizationReport: 按 ξ 排序的报告

    每条记录只取决于自身的 ξ: det C^ξ < 0 说明 (0, ξ] 内行列式已经变号，
    与 σ 判据不满足一样判为失败。步长 s 的报告因此是步长 1 报告的子集。
    """
    grid = r.grid
    threshold = config.SIGMA_RELATIVE_THRESHOLD if threshold is None else threshold
    if int(stride) != stride or stride < 1:
        raise InvalidInputError(f"stride 必须为正整数，实际为 {stride}")
    R = antiderivative(r)
    steps = _sweep_steps(grid, int(stride))
    started = time.perf_counter()

    def measure(k: int) -> Dict[str, float]:
        C = build_connecting(r, k, R)
        _, info = factorize(C, rcond_threshold=0.0, singular_values=True)
        kernel = ControlSpaceOperator(grid, k, C.kernel_part(), C.weights_in, C.weights_out)
        return {
            'sigma_min': info.sigma_min,
            'sigma_max': info.sigma_max,
            'rcond': info.rcond,
            'kernel_norm': weighted_norm(kernel),
            'log_abs_det': info.log_abs_det,
            'det_sign': info.det_sign,
        }

    workers = config.PARALLEL_WORKERS if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            measurements = list(executor.map(measure, steps))
    else:
        measurements = [measure(k) for k in steps]

    records = []
    for k, item in zip(steps, measurements):
        sign_change = item['det_sign'] < 0
        passed = item['sigma_min'] > threshold * item['sigma_max'] and not sign_change
        records.append(SweepRecord(k, grid.node(k), item['sigma_min'], item['sigma_max'], item['rcond'],
                                   item['kernel_norm'], item['log_abs_det'], item['det_sign'],
                                   sign_change, passed))
    report = CharacterizationReport(grid, int(stride), float(threshold), tuple(records))
    level = logging.INFO if report.verdict else logging.WARNING
    logger.log(level, "σ_min 扫描: %d 个 ξ, 结论 %s, 最小 σ_min/σ_max=%.3e (ξ=%.6g), 用时 %.3fs",
               len(records), 'pass' if report.verdict else 'fail', report.argmin.sigma_ratio,
               report.argmin.xi, time.perf_counter() - started)
    return report


def _delayed_block(Z: np.ndarray, N: int, M: int, k: int) -> float:
    """(I − X^{T,ξ}) Z X^{T,ξ} 的最大元素"""
    block = Z[: (M - k) * N, (M - k) * N:]
    return float(np.max(np.abs(block))) if block.size else 0.0


def check_factorization(r: ResponseFunction, stride: int = 1, workers: Optional[int] = None,
                        W: Optional[ControlSpaceOperator] = None,
                        W_dual: Optional[ControlSpaceOperator] = None) -> Dict[str, float]:
    """
    三角分解 C^T = (Z_♭)* Z 的残差

    Z = I^T W 与 Z_♭ = I^T W_♭ 分别由 r 与 r^T 的振幅路径得到。

    Returns:
        Dict[str, float]: triangularity（Z、Z_♭ 在所有扫描 ξ 上的最大越界元素）与
        factorization（带权算子范数下的相对残差）
    """
    grid = r.grid
    M, N = grid.M, grid.N
    if W is None:
        W, _, _ = recover_W_amplitude(r, workers=workers)
    if W_dual is None:
        W_dual, _, _ = recover_W_amplitude(r.transpose(), workers=workers)
    flip = flip_isometry(grid)
    Z = flip @ W
    Z_dual = flip @ W_dual
    triangularity = 0.0
    for k in _sweep_steps(grid, stride):
        triangularity = max(triangularity,
                            _delayed_block(Z.matrix, N, M, k),
                            _delayed_block(Z_dual.matrix, N, M, k))
    C_T = build_connecting(r, M)
    product = weighted_adjoint(Z_dual) @ Z
    residual = weighted_norm(C_T - product) / weighted_norm(C_T)
    logger.info("三角分解: 三角性残差 %.3e, 分解相对残差 %.3e", triangularity, residual)
    return {'triangularity': triangularity, 'factorization': residual}


def check_intertwining(r: ResponseFunction, k: int, dual: bool = False,
                       W: Optional[ControlSpaceOperator] = None) -> Dict[str, float]:
    """
    W 𝒫^{T,ξ} = Y^ξ W 的相对残差（dual 时对 W_♭ 与 𝒫_♭）

    Args:
        r (ResponseFunction): 响应函数
        k (int): ξ 步数
        dual (bool): 是否检查对偶变体
        W (Optional[ControlSpaceOperator]): 已组装的 W（对偶时为 W_♭）
    """
    grid = r.grid
    if W is None:
        W, _, _ = recover_W_amplitude(r.transpose() if dual else r)
    P = build_projector(r, k, dual=dual)
    Y = wave_cutoff(grid, k)
    residual = weighted_norm((W @ P) - (Y @ W)) / weighted_norm(W)
    logger.info("缠绕关系 (ξ=%.6g, dual=%s): 相对残差 %.3e", grid.node(k), dual, residual)
    return {'xi': grid.node(k), 'dual': dual, 'intertwining': residual}


def check_projector_identities(r: ResponseFunction, k: int, k_outer: Optional[int] = None) -> Dict[str, float]:
    """
    投影的代数恒等式: 幂等、值域、嵌套、C^T 𝒫 = (𝒫_♭)* C^T

    Args:
        r (ResponseFunction): 响应函数
        k (int): ξ 步数
        k_outer (Optional[int]): 嵌套检查用的 ξ′ > ξ 的步数，缺省取 M
    """
    grid = r.grid
    M, N = grid.M, grid.N
    k_outer = M if k_outer is None else k_outer
    C_T = build_connecting(r, M)
    P = build_projector(r, k, C_T=C_T)
    P_outer = build_projector(r, k_outer, C_T=C_T)
    P_dual = build_projector(r, k, dual=True, C_T=C_T)
    scale = weighted_norm(P)

    idempotency = weighted_norm((P @ P) - P) / scale
    X = cutoff(grid, k)
    range_residual = weighted_norm((P @ X) - X) / scale
    nesting = max(weighted_norm((P @ P_outer) - P), weighted_norm((P_outer @ P) - P)) / scale
    left = C_T @ P
    right = weighted_adjoint(P_dual) @ C_T
    intertwining = weighted_norm(left - right) / weighted_norm(left)
    logger.info("投影恒等式 (ξ=%.6g): 幂等 %.2e, 值域 %.2e, 嵌套 %.2e, C𝒫=(𝒫_♭)*C %.2e",
                grid.node(k), idempotency, range_residual, nesting, intertwining)
    return {
        'xi': grid.node(k),
        'idempotency': idempotency,
        'range': range_residual,
        'nesting': nesting,
        'connecting_intertwining': intertwining,
    }


def check_duality(V: MatrixFunction1D, grid: SpaceTimeGrid) -> Dict[str, float]:
    """
    max_j ‖r_♭(t_j) − r(t_j)^T‖，r_♭ 由转置势计算
    """
    r = forward_response(V, grid)
    r_dual = forward_response(dual_potential(V), grid)
    difference = r_dual.samples - np.swapaxes(r.samples, 1, 2)
    residual = float(np.max(np.linalg.norm(difference, ord=2, axis=(1, 2))))
    logger.info("对偶残差 (M=%d): %.3e", grid.M, residual)
    return {'M': grid.M, 'duality': residual}


def check_symmetric_pd(r: ResponseFunction) -> Dict[str, float]:
    """
    带权共轭并对称化后 C^T 的最小特征值（自伴情形应为正）
    """
    C_T = build_connecting(r, r.grid.M)
    B = weight_conjugated(C_T)
    eigenvalues = np.linalg.eigvalsh(0.5 * (B + B.T))
    asymmetry = float(np.max(np.abs(r.samples - np.swapaxes(r.samples, 1, 2))))
    if asymmetry > 0:
        logger.warning("响应函数不是对称矩阵值 (最大偏差 %.3e)，正定性仅作报告", asymmetry)
    return {'min_eigenvalue': float(eigenvalues[0]), 'response_asymmetry': asymmetry}


def default_test_control(grid: SpaceTimeGrid) -> np.ndarray:
    """在 [T/4, 3T/4] 上支撑的 C² 光滑控制 sin⁴"""
    t = np.arange(grid.M + 1) * grid.h
    a, b = 0.25 * grid.T, 0.75 * grid.T
    phase = np.clip((t - a) / (b - a), 0.0, 1.0)
    bump = np.sin(np.pi * phase) ** 4
    direction = np.arange(1, grid.N + 1, dtype=float) / grid.N
    return bump[:, None] * direction[None, :]


def check_second_derivative(r: ResponseFunction, f: Optional[np.ndarray] = None,
                            W: Optional[ControlSpaceOperator] = None,
                            potential: Optional[np.ndarray] = None) -> Dict[str, float]:
    """
    D_xx(W f) − V̂ (W f) − W (D_tt f) 在内部节点上的相对残差

    Args:
        r (ResponseFunction): 响应函数
        f (Optional[np.ndarray]): 两端附近为零的光滑控制 (M+1, N)
        W (Optional[ControlSpaceOperator]): 已组装的 W
        potential (Optional[np.ndarray]): V̂ 样本 (M+1, N, N)
    """
    grid = r.grid
    M, N, h = grid.M, grid.N, grid.h
    f = default_test_control(grid) if f is None else np.asarray(f, dtype=float).reshape(M + 1, N)
    if W is None:
        W, _, _ = recover_W_amplitude(r)
    if potential is None:
        potential = invert_response(r).samples
    second = np.zeros_like(f)
    second[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)

    wave = W.apply(f)
    lhs = (wave[2:] - 2.0 * wave[1:-1] + wave[:-2]) / (h * h)
    lhs -= np.einsum('iab,ib->ia', potential[1:-1], wave[1:-1])
    rhs = W.apply(second)[1:-1]
    residual = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    logger.info("二阶导数关系 (M=%d): 相对残差 %.3e", M, residual)
    return {'second_derivative': residual}


@dataclass(frozen=True)
class ScanRecord:
    """参数扫描中一个幅值 a 的结果"""

    amplitude: float
    min_ratio_interior: float
    ratio_at_T: float
    first_failure_xi: Optional[float]
    passes_at_T: bool

    @property
    def counterexample(self) -> bool:
        return self.first_failure_xi is not None and self.passes_at_T

    def to_dict(self) -> Dict[str, Any]:
        return {
            'amplitude': self.amplitude,
            'min_ratio_interior': self.min_ratio_interior,
            'ratio_at_T': self.ratio_at_T,
            'first_failure_xi': self.first_failure_xi,
            'passes_at_T': self.passes_at_T,
            'counterexample': self.counterexample,
        }


def cosine_family(grid: SpaceTimeGrid, amplitude: float, frequency: float = 3.0) -> ResponseFunction:
    """r_a(t) = a·cos(ω t)·I_N"""
    t = grid.time_nodes
    samples = amplitude * np.cos(frequency * t)[:, None, None] * np.eye(grid.N)[None]
    return ResponseFunction(grid, samples)


def scan_family(amplitudes: Sequence[float], grid: SpaceTimeGrid, frequency: float = 3.0,
                threshold: Optional[float] = None, stride: int = 1,
                workers: Optional[int] = None) -> List[ScanRecord]:
    """
    对 r_a(t) = a·cos(ω t) 扫描幅值，寻找某个 ξ < T 失败而 ξ = T 仍通过的 a

    Returns:
        List[ScanRecord]: 每个幅值一条记录
    """
    records = []
    for amplitude in amplitudes:
        report = sigma_min_sweep(cosine_family(grid, amplitude, frequency), stride, threshold, workers)
        interior = [record for record in report.records if record.xi_steps < grid.M]
        failure = report.first_failure
        if failure is not None and failure.xi_steps == grid.M and not failure.sign_change:
            failure = None
        final = report.records[-1]
        record = ScanRecord(
            float(amplitude),
            min((item.sigma_ratio for item in interior), default=final.sigma_ratio),
            final.sigma_ratio,
            None if failure is None else failure.xi,
            report.passes_at_T,
        )
        records.append(record)
        if record.counterexample:
            logger.info("幅值 a=%.6g: ξ=%.6g 处失败而 ξ=T 通过", amplitude, failure.xi)
    return records


def run_full_checks(r: ResponseFunction, k: Optional[int] = None, stride: int = 1,
                    workers: Optional[int] = None) -> Dict[str, Any]:
    """
    --full 时附加的全部恒等式检查

    Args:
        r (ResponseFunction): 已通过刻画的响应函数
        k (Optional[int]): 投影检查的 ξ 步数，缺省 M/2
    """
    grid = r.grid
    k = grid.M // 2 if k is None else k
    W, _, _ = recover_W_amplitude(r, workers=workers)
    W_dual, _, _ = recover_W_amplitude(r.transpose(), workers=workers)
    checks = {
        'projector': check_projector_identities(r, k),
        'intertwining': check_intertwining(r, k, W=W),
        'intertwining_dual': check_intertwining(r, k, dual=True, W=W_dual),
        'factorization': check_factorization(r, stride, workers, W, W_dual),
        'symmetric_pd': check_symmetric_pd(r),
        'second_derivative': check_second_derivative(r, W=W),
    }
    return checks


__all__ = [
    'SweepRecord',
    'CharacterizationReport',
    'sigma_min_sweep',
    'check_factorization',
    'check_intertwining',
    'check_projector_identities',
    'check_duality',
    'check_symmetric_pd',
    'default_test_control',
    'check_second_derivative',
    'ScanRecord',
    'cosine_family',
    'scan_family',
    'run_full_checks',
]
