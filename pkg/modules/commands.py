#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 命令实现

每个子命令一个类，均继承 BaseModule:
- forward: 势 → 响应文件
- invert: 响应文件 → 重建势 + 逐 ξ rcond 表
- characterize: 响应文件 → 刻画报告（--full 附加恒等式检查）
- simulate: 势 + 控制 → 时刻 t_j 的波场表
- roundtrip: 势 → 响应 → 重建势，M、2M、4M 的收敛表
- scan: r_a(t) = a·cos(ω t) 的幅值扫描表

设计模式:
- 模板方法模式（继承 BaseModule.run）
- 命令模式
"""

import argparse
import math
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from .base_module import BaseModule
from .characterization import default_test_control, run_full_checks, scan_family, sigma_min_sweep
from .errors import CharacterizationFailure, InvalidInputError
from .file_formats import read_control, write_matrix_function, write_report, write_table
from .forward import evaluate_wavefield, forward_response, response_from_kernel, solve_goursat
from .grid_core import Control, SpaceTimeGrid
from .inversion import invert_response
from .operator_calculus import apply_response_operator
from .run_config import RunConfig


class ForwardCommand(BaseModule):
    """正问题: 由势计算 [0, 2T] 上的响应函数"""

    def get_module_config(self) -> Dict[str, Any]:
        return {'command': 'forward', 'name': '正问题', 'description': '由势 V 计算响应函数 r'}

    def execute(self, run_config: RunConfig, args: argparse.Namespace) -> None:
        grid = run_config.grid
        V = run_config.potential_on(grid)
        r = forward_response(V, grid)
        trace = float(np.max(np.abs(r.samples[0] + 0.5 * V.samples[0])))
        self.logger.info("边界迹 |r(0) + V(0)/2| = %.3e", trace)
        write_matrix_function(run_config.output_path('forward'), 'response', grid, r.samples)


class InvertCommand(BaseModule):
    """反问题: 由响应函数重建势"""

    def get_module_config(self) -> Dict[str, Any]:
        return {'command': 'invert', 'name': '反问题', 'description': '由响应函数 r 重建势 V'}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument('--response', metavar='PATH', help='响应 JSON 文件（必需）')
        parser.add_argument('--dual', action='store_true', help='由 r^T 重建对偶势 V_♭ = V^T')

    def execute(self, run_config: RunConfig, args: argparse.Namespace) -> None:
        r = self.load_response(args.response, run_config)
        run_config = self.run_config
        if args.dual:
            r = r.transpose()
        potential = invert_response(r, method=run_config.method, stride=run_config.stride,
                                    rcond_threshold=run_config.rcond_threshold,
                                    workers=run_config.workers)
        write_matrix_function(run_config.output_path('invert'), 'potential', potential.grid, potential.samples)
        self.write_records(potential.diagnostics, self.diagnostics_path(run_config, 'rcond'))

    def on_characterization_failure(self, error: CharacterizationFailure) -> None:
        path = self.diagnostics_path(self.run_config, 'rcond')
        self.logger.warning("刻画失败，写出 %d 条部分诊断: %s", len(error.diagnostics), path)
        self.write_records(error.diagnostics, path)


class CharacterizeCommand(BaseModule):
    """刻画检查: 扫描每个 C^ξ 的同构性"""

    def get_module_config(self) -> Dict[str, Any]:
        return {'command': 'characterize', 'name': '刻画检查', 'description': '检查 r 是否满足刻画条件'}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument('--response', metavar='PATH', help='响应 JSON 文件（必需）')
        parser.add_argument('--full', action='store_true', help='附加投影、交织、分解等恒等式检查')

    def execute(self, run_config: RunConfig, args: argparse.Namespace) -> None:
        r = self.load_response(args.response, run_config)
        run_config = self.run_config
        report = sigma_min_sweep(r, run_config.stride, run_config.threshold, run_config.workers)
        document = report.to_dict()
        if args.full and report.verdict:
            document['checks'] = run_full_checks(r, stride=run_config.stride, workers=run_config.workers)
        write_report(run_config.output_path('characterize'), document)
        if run_config.diagnostics:
            self.write_records(list(report.records), run_config.diagnostics)

        failure = report.first_failure
        if failure is not None:
            if report.passes_at_T:
                self.logger.warning("C^T 通过而 ξ=%.6g 处失败: 仅检查 ξ = T 不足以判定", failure.xi)
            if report.sign_change_bracket is not None:
                self.logger.warning("det C^ξ 在 (%.6g, %.6g] 内变号", *report.sign_change_bracket)
            reason = 'det_sign' if failure.sign_change else 'rcond'
            raise CharacterizationFailure(failure.xi, failure.rcond, list(report.records), reason)
        self.logger.info("刻画通过: 最小 σ_min/σ_max = %.3e (ξ=%.6g)",
                         report.argmin.sigma_ratio, report.argmin.xi)


class SimulateCommand(BaseModule):
    """波场模拟: u^f(·, t_j) = W^{t_j} f"""

    def get_module_config(self) -> Dict[str, Any]:
        return {'command': 'simulate', 'name': '波场模拟', 'description': '计算给定控制在时刻 t 的波场'}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument('--control', metavar='PATH', help='控制文件（JSON 或 CSV），缺省为光滑测试控制')
        parser.add_argument('--time-index', type=int, metavar='J', help='时刻下标 j，t = j·h（缺省 M）')

    def execute(self, run_config: RunConfig, args: argparse.Namespace) -> None:
        grid = run_config.grid
        M, N = grid.M, grid.N
        V = run_config.potential_on(grid)
        f = read_control(args.control, grid) if args.control else Control(grid, default_test_control(grid))
        j = M if args.time_index is None else args.time_index
        w = solve_goursat(V, grid)
        field = evaluate_wavefield(w, f, j)

        if j >= 2:
            self._log_boundary_trace(w, f, field.samples, j)
        frame = pd.DataFrame({'x': grid.space_nodes})
        for a in range(N):
            frame[f'u{a + 1}'] = field.samples[:, a]
        write_table(frame, run_config.output_path('simulate'))

    def _log_boundary_trace(self, w, f: Control, u: np.ndarray, j: int) -> None:
        grid = f.grid
        extended = np.zeros((2 * grid.M + 1, grid.N))
        extended[: grid.M + 1] = f.samples
        expected = apply_response_operator(response_from_kernel(w), extended)[j]
        measured = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * grid.h)
        self.logger.info("边界迹 u_x(0, t_j) 与 (R f)(t_j) 之差: %.3e",
                         float(np.max(np.abs(measured - expected))))


class RoundtripCommand(BaseModule):
    """往返收敛表: 误差 ‖V̂ − V‖_∞ 随 M 的变化"""

    def get_module_config(self) -> Dict[str, Any]:
        return {'command': 'roundtrip', 'name': '往返收敛', 'description': '正问题 + 反问题在 M、2M、4M 的误差表'}

    def execute(self, run_config: RunConfig, args: argparse.Namespace) -> None:
        rows: List[Dict[str, float]] = []
        previous = None
        for level in range(run_config.roundtrip_levels):
            grid = SpaceTimeGrid(run_config.N, run_config.T, run_config.M * 2 ** level)
            V = run_config.potential_on(grid)
            r = forward_response(V, grid)
            recovered = invert_response(r, method=run_config.method, stride=run_config.stride,
                                        rcond_threshold=run_config.rcond_threshold,
                                        workers=run_config.workers)
            error = float(np.max(np.abs(recovered.samples - V.samples[:: run_config.stride])))
            ratio = previous / error if previous is not None and error > 0 else math.nan
            rows.append({
                'M': grid.M,
                'h': grid.h,
                'error': error,
                'ratio': ratio,
                'order': math.log2(ratio) if ratio > 0 else math.nan,
                'trace_error': float(np.max(np.abs(r.samples[0] + 0.5 * V.samples[0]))),
                'min_rcond': min(item.rcond for item in recovered.diagnostics),
            })
            self.logger.info("M=%d: 误差 %.3e，比值 %.3g", grid.M, error, ratio)
            previous = error
        write_table(pd.DataFrame(rows), run_config.output_path('roundtrip'))


class ScanCommand(BaseModule):
    """参数扫描: 寻找 C^T 通过而某个 C^ξ 失败的响应"""

    def get_module_config(self) -> Dict[str, Any]:
        return {'command': 'scan', 'name': '参数扫描', 'description': 'r_a(t) = a·cos(ω t) 的幅值扫描'}

    def execute(self, run_config: RunConfig, args: argparse.Namespace) -> None:
        if not run_config.scan_amplitudes:
            raise InvalidInputError("扫描幅值列表为空")
        records = scan_family(run_config.scan_amplitudes, run_config.grid, run_config.scan_frequency,
                              run_config.threshold, run_config.stride, run_config.workers)
        found = [record.amplitude for record in records if record.counterexample]
        self.logger.info("扫描 %d 个幅值，其中 %d 个为反例", len(records), len(found))
        self.write_records(records, run_config.output_path('scan'))


__all__ = [
    'ForwardCommand',
    'InvertCommand',
    'CharacterizeCommand',
    'SimulateCommand',
    'RoundtripCommand',
    'ScanCommand',
]
