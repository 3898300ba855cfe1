#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 运行配置

一次运行由一个 JSON 配置文件描述，命令行参数在其上覆盖（参数优先），
缺省值取自 config.py。加载时检查全部不变量，命名势族在网格上求值检查有限性。

设计模式:
- 值对象模式
"""

import json
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import config
from .data_processors import evaluate_potential
from .errors import InvalidInputError
from .grid_core import MatrixFunction1D, SpaceTimeGrid
from .inversion import RECOVERY_METHODS

logger = logging.getLogger(__name__)

CONFIG_KEYS = {
    'N', 'T', 'M', 'potential', 'method', 'stride', 'threshold', 'rcond_threshold',
    'workers', 'out', 'diagnostics', 'scan', 'roundtrip_levels',
}


@dataclass(frozen=True)
class RunConfig:
    """
    一次运行的全部配置

    Attributes:
        N, T, M: 网格
        potential (Optional[Dict[str, Any]]): 势规格，forward / simulate / roundtrip 需要
        method (str): 恢复路径
        stride (int): ξ 扫描步长
        threshold (float): σ_min 相对阈值
        rcond_threshold (float): 求解时的奇异判定阈值
        workers (int): 线程数
        out (Optional[str]): 主输出路径
        diagnostics (Optional[str]): 诊断表路径
        scan_amplitudes (Tuple[float, ...]): 扫描幅值
        scan_frequency (float): 扫描频率
        roundtrip_levels (int): 收敛表的加密层数
    """

    N: int = config.DEFAULT_N
    T: float = config.DEFAULT_T
    M: int = config.DEFAULT_M
    potential: Optional[Dict[str, Any]] = None
    method: str = config.DEFAULT_METHOD
    stride: int = 1
    threshold: float = config.SIGMA_RELATIVE_THRESHOLD
    rcond_threshold: float = config.RCOND_THRESHOLD
    workers: int = config.PARALLEL_WORKERS
    out: Optional[str] = None
    diagnostics: Optional[str] = None
    scan_amplitudes: Tuple[float, ...] = field(default_factory=tuple)
    scan_frequency: float = config.SCAN_FREQUENCY
    roundtrip_levels: int = config.ROUNDTRIP_LEVELS

    @property
    def grid(self) -> SpaceTimeGrid:
        return SpaceTimeGrid(self.N, self.T, self.M)

    def potential_on(self, grid: Optional[SpaceTimeGrid] = None) -> MatrixFunction1D:
        """在给定网格（缺省为运行网格）上求值势规格"""
        if self.potential is None:
            raise InvalidInputError("配置中缺少 potential 规格")
        return evaluate_potential(self.potential, grid or self.grid)

    def output_path(self, command: str) -> str:
        return self.out or config.DEFAULT_OUTPUTS[command]

    def validate(self, check_potential: bool = True) -> None:
        """
        检查不变量

        Args:
            check_potential (bool): 是否在网格上求值势规格

        Raises:
            InvalidInputError: 任一不变量不成立
        """
        for name in ('N', 'M', 'stride', 'workers', 'roundtrip_levels'):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidInputError(f"{name} 必须是整数，实际为 {value!r}")
        if self.N < 1:
            raise InvalidInputError(f"N 必须 ≥ 1，实际为 {self.N}")
        if self.M < config.MIN_STEPS:
            raise InvalidInputError(f"M 必须 ≥ {config.MIN_STEPS}，实际为 {self.M}")
        if not isinstance(self.T, (int, float)) or isinstance(self.T, bool) or not self.T > 0:
            raise InvalidInputError(f"T 必须 > 0，实际为 {self.T!r}")
        if self.method not in RECOVERY_METHODS:
            raise InvalidInputError(f"未知的恢复方法: {self.method!r}，可选 {RECOVERY_METHODS}")
        if self.stride < 1 or self.M % self.stride:
            raise InvalidInputError(f"stride 必须 ≥ 1 且整除 M，实际 stride={self.stride}, M={self.M}")
        if self.M // self.stride < config.MIN_STEPS:
            raise InvalidInputError(f"M/stride 必须 ≥ {config.MIN_STEPS}")
        for name in ('threshold', 'rcond_threshold'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
                raise InvalidInputError(f"{name} 必须 > 0，实际为 {value!r}")
        if self.workers < 1:
            raise InvalidInputError(f"workers 必须 ≥ 1，实际为 {self.workers}")
        if self.roundtrip_levels < 2:
            raise InvalidInputError(f"roundtrip_levels 必须 ≥ 2，实际为 {self.roundtrip_levels}")
        if check_potential and self.potential is not None and self.potential.get('type') != 'file':
            # 命名族在运行网格上必须给出有限样本
            self.potential_on()

    def with_grid(self, grid: SpaceTimeGrid) -> 'RunConfig':
        """
        换用输入文件的网格，重新检查与网格相关的不变量

        Args:
            grid (SpaceTimeGrid): 响应文件中的网格

        Returns:
            RunConfig: 新配置
        """
        updated = replace(self, N=grid.N, T=grid.T, M=grid.M)
        updated.validate(check_potential=False)
        return updated


def _read_document(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding=config.DEFAULT_ENCODING) as f:
            document = json.load(f)
    except FileNotFoundError:
        raise InvalidInputError(f"配置文件不存在: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InvalidInputError(f"配置文件解析失败 ({path}): {e}") from None
    if not isinstance(document, dict):
        raise InvalidInputError(f"配置文件 {path} 的顶层必须是对象")
    unknown = set(document) - CONFIG_KEYS
    if unknown:
        raise InvalidInputError(f"配置文件含有未知字段: {sorted(unknown)}")
    return document


def _scan_fields(scan: Any) -> Dict[str, Any]:
    if not isinstance(scan, dict):
        raise InvalidInputError("scan 必须是对象")
    fields = {}
    if 'amplitudes' in scan:
        try:
            fields['scan_amplitudes'] = tuple(float(a) for a in scan['amplitudes'])
        except (TypeError, ValueError):
            raise InvalidInputError("scan.amplitudes 必须是数值列表") from None
    if 'frequency' in scan:
        fields['scan_frequency'] = float(scan['frequency'])
    return fields


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    加载运行配置

    Args:
        path (Optional[str]): JSON 配置文件路径，None 时只用缺省值
        overrides (Optional[Dict[str, Any]]): 命令行覆盖，值为 None 的项忽略

    Returns:
        RunConfig: 已校验的配置
    """
    values: Dict[str, Any] = {}
    if path:
        document = _read_document(path)
        scan = document.pop('scan', None)
        if scan is not None:
            values.update(_scan_fields(scan))
        values.update(document)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    if 'potential' in values and values['potential'] is not None and not isinstance(values['potential'], dict):
        raise InvalidInputError("potential 必须是对象")
    if not values.get('scan_amplitudes'):
        low, high = config.SCAN_AMPLITUDE_RANGE
        count = config.SCAN_AMPLITUDE_COUNT
        values['scan_amplitudes'] = tuple(low + (high - low) * i / (count - 1) for i in range(count))
    run_config = replace(RunConfig(), **values)
    run_config.validate()
    logger.debug("运行配置: %s", run_config)
    return run_config


__all__ = ['RunConfig', 'load_run_config', 'CONFIG_KEYS']
