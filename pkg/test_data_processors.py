#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
势规格处理器测试
"""

import os
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_allclose

from modules.data_processors import (
    ConstantPotentialProcessor,
    PotentialProcessor,
    PotentialProcessorFactory,
    evaluate_potential,
)
from modules.errors import InvalidInputError
from modules.file_formats import write_matrix_function
from modules.grid_core import MatrixFunction1D, SpaceTimeGrid


class TestPotentialProcessors(unittest.TestCase):
    def setUp(self):
        """测试前的准备工作"""
        self.grid = SpaceTimeGrid(2, 1.0, 10)
        self.scalar_grid = SpaceTimeGrid(1, 2.0, 8)

    def test_constant(self):
        """测试常数势（标量与矩阵写法）"""
        V = evaluate_potential({'type': 'constant', 'value': 1.5}, self.scalar_grid)
        assert_allclose(V.samples[:, 0, 0], 1.5)
        V = evaluate_potential({'type': 'constant', 'value': [[0, 1], [0, 0]]}, self.grid)
        assert_allclose(V.samples[7], [[0, 1], [0, 0]])
        V = evaluate_potential({'type': 'constant', 'value': [0, 1, 2, 3]}, self.grid)
        assert_allclose(V.samples[0], [[0, 1], [2, 3]])

    def test_polynomial(self):
        """测试多项式势 V(x) = C0 + C1 x + C2 x²"""
        spec = {'type': 'polynomial', 'coefficients': [1.0, -2.0, 3.0]}
        V = evaluate_potential(spec, self.scalar_grid)
        x = self.scalar_grid.space_nodes
        assert_allclose(V.samples[:, 0, 0], 1.0 - 2.0 * x + 3.0 * x ** 2, rtol=1e-14)

    def test_trigonometric(self):
        """测试三角函数势"""
        entries = [
            [{'sin': [[1.0, 1.0]]}, {'const': 0.3}],
            [{'const': -0.1}, {'cos': [[1.0, 1.0]]}],
        ]
        V = evaluate_potential({'type': 'trigonometric', 'entries': entries}, self.grid)
        x = self.grid.space_nodes
        assert_allclose(V.samples[:, 0, 0], np.sin(x))
        assert_allclose(V.samples[:, 0, 1], 0.3)
        assert_allclose(V.samples[:, 1, 0], -0.1)
        assert_allclose(V.samples[:, 1, 1], np.cos(x))

    def test_trigonometric_scalar(self):
        """测试 N=1 时三角函数项可直接给出对象"""
        spec = {'type': 'trigonometric', 'entries': {'const': 1.0, 'cos': [[2.0, 3.0]]}}
        V = evaluate_potential(spec, self.scalar_grid)
        x = self.scalar_grid.space_nodes
        assert_allclose(V.samples[:, 0, 0], 1.0 + 2.0 * np.cos(3.0 * x))

    def test_trigonometric_invalid(self):
        """测试三角函数项的格式错误"""
        with self.assertRaises(InvalidInputError):
            evaluate_potential({'type': 'trigonometric', 'entries': {'tan': [[1, 1]]}}, self.scalar_grid)
        with self.assertRaises(InvalidInputError):
            evaluate_potential({'type': 'trigonometric', 'entries': {'sin': [[1, 1, 1]]}}, self.scalar_grid)

    def test_samples(self):
        """测试内联样本"""
        rows = [[float(i), 0.0, 0.0, -float(i)] for i in range(11)]
        V = evaluate_potential({'type': 'samples', 'samples': rows}, self.grid)
        assert_allclose(V.samples[4], [[4.0, 0.0], [0.0, -4.0]])
        with self.assertRaises(InvalidInputError):
            evaluate_potential({'type': 'samples', 'samples': rows[:-1]}, self.grid)

    def test_file(self):
        """测试外部势文件及网格一致性检查"""
        samples = np.tile([[1.0, 2.0], [3.0, 4.0]], (11, 1, 1))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'potential.json')
            write_matrix_function(path, 'potential', self.grid, samples)
            V = evaluate_potential({'type': 'file', 'path': path}, self.grid)
            assert_allclose(V.samples, samples)
            with self.assertRaises(InvalidInputError):
                evaluate_potential({'type': 'file', 'path': path}, SpaceTimeGrid(2, 1.0, 12))
            with self.assertRaises(InvalidInputError):
                evaluate_potential({'type': 'file', 'path': os.path.join(tmp, 'missing.json')}, self.grid)

    def test_non_finite(self):
        """测试非有限值被拒绝"""
        with self.assertRaises(InvalidInputError):
            evaluate_potential({'type': 'constant', 'value': float('nan')}, self.scalar_grid)

    def test_unknown_and_malformed(self):
        """测试未知类型与缺少字段"""
        with self.assertRaises(InvalidInputError):
            evaluate_potential({'type': 'bessel'}, self.grid)
        with self.assertRaises(InvalidInputError):
            evaluate_potential({'type': 'constant'}, self.grid)
        with self.assertRaises(InvalidInputError):
            evaluate_potential({'type': 'constant', 'value': [1.0, 2.0, 3.0]}, self.grid)
        with self.assertRaises(InvalidInputError):
            evaluate_potential([1.0], self.grid)


class TestPotentialProcessorFactory(unittest.TestCase):
    def test_available(self):
        """测试可用处理器列表"""
        available = PotentialProcessorFactory.get_available_processors()
        for name in ('samples', 'constant', 'polynomial', 'trigonometric', 'file'):
            self.assertIn(name, available)
        self.assertIsInstance(PotentialProcessorFactory.create_processor('constant'), ConstantPotentialProcessor)
        self.assertIsNone(PotentialProcessorFactory.create_processor('missing'))

    def test_register(self):
        """测试注册新的处理器"""

        class LinearProcessor(PotentialProcessor):
            def process(self, spec, grid):
                x = grid.space_nodes
                return MatrixFunction1D.on_space(grid, spec['slope'] * x)

            def validate(self, spec):
                return 'slope' in spec

            def get_supported_formats(self):
                return ['{"type": "linear", "slope": 2.0}']

        PotentialProcessorFactory.register_processor('linear', LinearProcessor)
        try:
            grid = SpaceTimeGrid(1, 1.0, 8)
            V = evaluate_potential({'type': 'linear', 'slope': 2.0}, grid)
            assert_allclose(V.samples[:, 0, 0], 2.0 * grid.space_nodes)
        finally:
            PotentialProcessorFactory._processors.pop('linear', None)

        with self.assertRaises(ValueError):
            PotentialProcessorFactory.register_processor('bad', dict)

    def test_supported_formats(self):
        """测试每个处理器都给出写法示例"""
        for name in PotentialProcessorFactory.get_available_processors():
            formats = PotentialProcessorFactory.create_processor(name).get_supported_formats()
            self.assertTrue(formats)


if __name__ == '__main__':
    unittest.main()
