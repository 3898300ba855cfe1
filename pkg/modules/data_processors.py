#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 势规格处理策略

每种势规格（内联样本、常数、多项式、三角函数、外部文件）对应一个处理器，
统一实现 process / validate / get_supported_formats 接口，
由工厂按规格中的 "type" 字段选择。命名族在网格节点上解析求值，不经过文件往返。

设计模式:
- 策略模式
- 工厂模式
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import InvalidInputError
from .grid_core import MatrixFunction1D, SpaceTimeGrid

logger = logging.getLogger(__name__)


def _as_matrix(value: Any, N: int, what: str) -> np.ndarray:
    """把标量（N=1）、N×N 嵌套列表或 N*N 行优先列表转为矩阵"""
    array = np.asarray(value, dtype=float)
    if array.ndim == 0 and N == 1:
        return array.reshape(1, 1)
    if array.shape == (N, N):
        return array
    if array.shape == (N * N,):
        return array.reshape(N, N)
    raise InvalidInputError(f"{what} 应为 {N}×{N} 矩阵，实际形状 {array.shape}")


class PotentialProcessor(ABC):
    """
    势规格处理策略抽象基类

    定义了势规格的标准接口，所有具体策略都必须实现这些方法。
    """

    @abstractmethod
    def process(self, spec: Dict[str, Any], grid: SpaceTimeGrid) -> MatrixFunction1D:
        """
        在网格 x_0..x_M 上求值

        Args:
            spec (Dict[str, Any]): 势规格
            grid (SpaceTimeGrid): 网格

        Returns:
            MatrixFunction1D: M+1 个样本
        """
        pass

    @abstractmethod
    def validate(self, spec: Dict[str, Any]) -> bool:
        """
        检查规格的结构

        Args:
            spec (Dict[str, Any]): 势规格

        Returns:
            bool: 规格是否有效
        """
        pass

    @abstractmethod
    def get_supported_formats(self) -> List[str]:
        """
        获取支持的规格写法

        Returns:
            List[str]: 写法示例列表
        """
        pass

    def _finish(self, samples: np.ndarray, grid: SpaceTimeGrid, name: str) -> MatrixFunction1D:
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError(f"{name} 势在网格节点上出现非有限值")
        return MatrixFunction1D.on_space(grid, samples)


class SamplesPotentialProcessor(PotentialProcessor):
    """内联样本: 每个节点一行行优先的 N*N 浮点数"""

    def process(self, spec: Dict[str, Any], grid: SpaceTimeGrid) -> MatrixFunction1D:
        if not self.validate(spec):
            raise InvalidInputError("samples 规格缺少 'samples' 列表")
        rows = spec['samples']
        if len(rows) != grid.M + 1:
            raise InvalidInputError(f"内联样本数 {len(rows)} 与网格节点数 {grid.M + 1} 不符")
        samples = np.stack([_as_matrix(row, grid.N, f"样本 {i}") for i, row in enumerate(rows)])
        return self._finish(samples, grid, 'samples')

    def validate(self, spec: Dict[str, Any]) -> bool:
        return isinstance(spec.get('samples'), list) and len(spec['samples']) > 0

    def get_supported_formats(self) -> List[str]:
        return ['{"type": "samples", "samples": [[v11, v12, v21, v22], ...]}']


class ConstantPotentialProcessor(PotentialProcessor):
    """常数势 V(x) ≡ C"""

    def process(self, spec: Dict[str, Any], grid: SpaceTimeGrid) -> MatrixFunction1D:
        if not self.validate(spec):
            raise InvalidInputError("constant 规格缺少 'value'")
        value = _as_matrix(spec['value'], grid.N, 'value')
        samples = np.broadcast_to(value, (grid.M + 1, grid.N, grid.N))
        return self._finish(np.array(samples), grid, 'constant')

    def validate(self, spec: Dict[str, Any]) -> bool:
        return 'value' in spec

    def get_supported_formats(self) -> List[str]:
        return ['{"type": "constant", "value": 1.0}', '{"type": "constant", "value": [[0, 1], [0, 0]]}']


class PolynomialPotentialProcessor(PotentialProcessor):
    """多项式势 V(x) = Σ_n C_n x^n"""

    def process(self, spec: Dict[str, Any], grid: SpaceTimeGrid) -> MatrixFunction1D:
        if not self.validate(spec):
            raise InvalidInputError("polynomial 规格缺少非空的 'coefficients'")
        coefficients = [_as_matrix(c, grid.N, f"系数 {n}") for n, c in enumerate(spec['coefficients'])]
        x = grid.space_nodes
        samples = np.zeros((grid.M + 1, grid.N, grid.N))
        for coefficient in reversed(coefficients):
            samples = samples * x[:, None, None] + coefficient[None]
        return self._finish(samples, grid, 'polynomial')

    def validate(self, spec: Dict[str, Any]) -> bool:
        return isinstance(spec.get('coefficients'), list) and len(spec['coefficients']) > 0

    def get_supported_formats(self) -> List[str]:
        return ['{"type": "polynomial", "coefficients": [C0, C1, ...]}']


class TrigonometricPotentialProcessor(PotentialProcessor):
    """
    三角函数势

    每个矩阵元素为 const + Σ a·sin(ω x) + Σ b·cos(ω x)。
    """

    def process(self, spec: Dict[str, Any], grid: SpaceTimeGrid) -> MatrixFunction1D:
        if not self.validate(spec):
            raise InvalidInputError("trigonometric 规格缺少 'entries'")
        entries = spec['entries']
        N = grid.N
        if isinstance(entries, dict) and N == 1:
            entries = [[entries]]
        if len(entries) != N or any(len(row) != N for row in entries):
            raise InvalidInputError(f"trigonometric 的 entries 应为 {N}×{N} 嵌套列表")
        x = grid.space_nodes
        samples = np.zeros((grid.M + 1, N, N))
        for a in range(N):
            for b in range(N):
                samples[:, a, b] = self._evaluate(entries[a][b], x)
        return self._finish(samples, grid, 'trigonometric')

    @staticmethod
    def _evaluate(entry: Dict[str, Any], x: np.ndarray) -> np.ndarray:
        if not isinstance(entry, dict):
            raise InvalidInputError(f"三角函数项必须是对象，实际为 {entry!r}")
        unknown = set(entry) - {'const', 'sin', 'cos'}
        if unknown:
            raise InvalidInputError(f"三角函数项含有未知字段: {sorted(unknown)}")
        values = np.full_like(x, float(entry.get('const', 0.0)))
        for name, function in (('sin', np.sin), ('cos', np.cos)):
            for term in entry.get(name, []):
                if len(term) != 2:
                    raise InvalidInputError(f"{name} 项应为 [幅值, 频率]，实际为 {term!r}")
                amplitude, frequency = float(term[0]), float(term[1])
                values = values + amplitude * function(frequency * x)
        return values

    def validate(self, spec: Dict[str, Any]) -> bool:
        return isinstance(spec.get('entries'), (list, dict))

    def get_supported_formats(self) -> List[str]:
        return ['{"type": "trigonometric", "entries": [[{"const": 0.3, "sin": [[1, 1]], "cos": []}, ...], ...]}']


class FilePotentialProcessor(PotentialProcessor):
    """外部势 JSON 文件，网格必须与运行配置一致"""

    def process(self, spec: Dict[str, Any], grid: SpaceTimeGrid) -> MatrixFunction1D:
        from .file_formats import read_matrix_function

        if not self.validate(spec):
            raise InvalidInputError("file 规格缺少 'path'")
        _, file_grid, samples = read_matrix_function(spec['path'], expected_kind='potential')
        if file_grid.N != grid.N or file_grid.M != grid.M or not np.isclose(file_grid.T, grid.T, rtol=0, atol=1e-15):
            raise InvalidInputError(f"势文件的网格 {file_grid} 与运行网格 {grid} 不一致")
        return self._finish(samples, grid, 'file')

    def validate(self, spec: Dict[str, Any]) -> bool:
        return isinstance(spec.get('path'), str) and bool(spec['path'])

    def get_supported_formats(self) -> List[str]:
        return ['{"type": "file", "path": "potential.json"}']


class PotentialProcessorFactory:
    """
    势处理器工厂类

    使用工厂模式按规格类型创建处理器。
    """

    _processors = {
        'samples': SamplesPotentialProcessor,
        'constant': ConstantPotentialProcessor,
        'polynomial': PolynomialPotentialProcessor,
        'trigonometric': TrigonometricPotentialProcessor,
        'file': FilePotentialProcessor,
    }

    @classmethod
    def create_processor(cls, processor_type: str) -> Optional[PotentialProcessor]:
        """
        创建势处理器

        Args:
            processor_type (str): 规格类型

        Returns:
            Optional[PotentialProcessor]: 处理器实例，类型不存在时返回 None
        """
        processor_class = cls._processors.get(processor_type)
        if processor_class:
            return processor_class()
        return None

    @classmethod
    def get_available_processors(cls) -> List[str]:
        return list(cls._processors.keys())

    @classmethod
    def register_processor(cls, processor_type: str, processor_class: type) -> None:
        """
        注册新的势处理器

        Args:
            processor_type (str): 规格类型
            processor_class (type): 处理器类
        """
        if isinstance(processor_class, type) and issubclass(processor_class, PotentialProcessor):
            cls._processors[processor_type] = processor_class
        else:
            raise ValueError("处理器类必须继承自 PotentialProcessor")


def evaluate_potential(spec: Dict[str, Any], grid: SpaceTimeGrid) -> MatrixFunction1D:
    """
    按规格在网格上求值势

    Args:
        spec (Dict[str, Any]): 带 "type" 字段的势规格
        grid (SpaceTimeGrid): 网格

    Returns:
        MatrixFunction1D: M+1 个样本
    """
    if not isinstance(spec, dict):
        raise InvalidInputError(f"势规格必须是对象，实际为 {type(spec).__name__}")
    kind = spec.get('type')
    processor = PotentialProcessorFactory.create_processor(kind)
    if processor is None:
        raise InvalidInputError(
            f"未知的势类型: {kind!r}，可选 {PotentialProcessorFactory.get_available_processors()}"
        )
    potential = processor.process(spec, grid)
    logger.debug("势规格 %s 在 %d 个节点上求值", kind, grid.M + 1)
    return potential


__all__ = [
    'PotentialProcessor',
    'SamplesPotentialProcessor',
    'ConstantPotentialProcessor',
    'PolynomialPotentialProcessor',
    'TrigonometricPotentialProcessor',
    'FilePotentialProcessor',
    'PotentialProcessorFactory',
    'evaluate_potential',
]
