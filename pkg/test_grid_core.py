#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
离散化基础模块测试
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose

from modules.errors import InvalidInputError
from modules.grid_core import (
    Control,
    MatrixFunction1D,
    SpaceTimeGrid,
    cumulative_integral,
    diagonal_derivative,
    trapezoid_weights,
)


class TestSpaceTimeGrid(unittest.TestCase):
    def test_nodes(self):
        """测试节点与步长"""
        grid = SpaceTimeGrid(2, 1.0, 10)
        self.assertAlmostEqual(grid.h, 0.1)
        self.assertEqual(grid.space_nodes.shape, (11,))
        self.assertEqual(grid.time_nodes.shape, (21,))
        self.assertAlmostEqual(grid.time_nodes[-1], 2.0)

    def test_invalid(self):
        """测试非法网格"""
        with self.assertRaises(InvalidInputError):
            SpaceTimeGrid(0, 1.0, 10)
        with self.assertRaises(InvalidInputError):
            SpaceTimeGrid(1, -1.0, 10)
        with self.assertRaises(InvalidInputError):
            SpaceTimeGrid(1, float('nan'), 10)
        with self.assertRaises(ValueError):
            SpaceTimeGrid(1, 1.0, 0)

    def test_coarsen(self):
        """测试抽取粗网格"""
        grid = SpaceTimeGrid(1, 2.0, 40)
        coarse = grid.coarsen(4)
        self.assertEqual(coarse.M, 10)
        self.assertAlmostEqual(coarse.h, 4 * grid.h)
        with self.assertRaises(InvalidInputError):
            grid.coarsen(3)


class TestQuadrature(unittest.TestCase):
    def test_trapezoid_weights(self):
        """测试梯形权重"""
        assert_allclose(trapezoid_weights(4, 0.5), [0.25, 0.5, 0.5, 0.25])
        assert_allclose(trapezoid_weights(1, 0.5), [0.0])
        with self.assertRaises(InvalidInputError):
            trapezoid_weights(0, 0.5)

    def test_cumulative_integral_linear(self):
        """测试线性函数的累积积分（梯形公式精确）"""
        grid = SpaceTimeGrid(1, 1.0, 20)
        t = grid.space_nodes
        F = cumulative_integral(MatrixFunction1D.on_space(grid, 2.0 * t))
        assert_allclose(F.samples[:, 0, 0], t ** 2, atol=1e-14)
        self.assertEqual(F.samples[0, 0, 0], 0.0)

    def test_diagonal_derivative_quadratic(self):
        """测试二次函数的导数精确"""
        h = 0.05
        x = np.arange(21) * h
        d = np.stack([np.array([[x_i ** 2, 3 * x_i], [1.0, -x_i ** 2]]) for x_i in x])
        derivative = diagonal_derivative(d, h).samples
        assert_allclose(derivative[:, 0, 0], 2 * x, atol=1e-11)
        assert_allclose(derivative[:, 0, 1], 3.0, atol=1e-11)
        assert_allclose(derivative[:, 1, 0], 0.0, atol=1e-11)

    def test_cumulative_integral_quadratic(self):
        """测试 ∫_0^1 t² 的梯形误差不超过 h²/6"""
        grid = SpaceTimeGrid(1, 1.0, 100)
        t = grid.space_nodes
        F = cumulative_integral(MatrixFunction1D.on_space(grid, t ** 2))
        self.assertLessEqual(abs(F.samples[-1, 0, 0] - 1.0 / 3.0), grid.h ** 2 / 6 * (1 + 1e-9))

    def test_diagonal_derivative_second_order(self):
        """测试 sin 的导数误差在 M=200 加密后至少降为 1/3.5"""
        errors = []
        for M in (200, 400):
            h = 1.0 / M
            x = np.arange(M + 1) * h
            derivative = diagonal_derivative(np.sin(x), h).samples[:, 0, 0]
            errors.append(np.max(np.abs(derivative - np.cos(x))))
        self.assertGreaterEqual(errors[0] / errors[1], 3.5)

    def test_diagonal_derivative_short(self):
        """测试样本过少"""
        with self.assertRaises(InvalidInputError):
            diagonal_derivative(np.zeros(2), 0.1)


class TestSampledFunctions(unittest.TestCase):
    def setUp(self):
        """测试前的准备工作"""
        self.grid = SpaceTimeGrid(2, 1.0, 8)

    def test_matrix_function_copy(self):
        """测试样本被复制且只读，调用方数组不受影响"""
        samples = np.zeros((9, 2, 2))
        function = MatrixFunction1D.on_space(self.grid, samples)
        samples[0, 0, 0] = 5.0
        self.assertEqual(function.samples[0, 0, 0], 0.0)
        with self.assertRaises(ValueError):
            function.samples[0, 0, 0] = 1.0

    def test_matrix_function_validation(self):
        """测试形状与有限性检查"""
        with self.assertRaises(InvalidInputError):
            MatrixFunction1D.on_space(self.grid, np.zeros((8, 2, 2)))
        with self.assertRaises(InvalidInputError):
            MatrixFunction1D.on_time(self.grid, np.zeros((9, 2, 2)))
        bad = np.zeros((9, 2, 2))
        bad[3, 1, 1] = np.inf
        with self.assertRaises(InvalidInputError):
            MatrixFunction1D.on_space(self.grid, bad)

    def test_transpose(self):
        """测试逐点转置"""
        samples = np.arange(36, dtype=float).reshape(9, 2, 2)
        transposed = MatrixFunction1D.on_space(self.grid, samples).transpose()
        assert_allclose(transposed.samples[4], samples[4].T)

    def test_scalar_shorthand(self):
        """测试 N=1 时接受一维样本"""
        grid = SpaceTimeGrid(1, 1.0, 8)
        function = MatrixFunction1D.on_time(grid, np.ones(17))
        self.assertEqual(function.samples.shape, (17, 1, 1))
        control = Control(grid, np.ones(9))
        self.assertEqual(control.samples.shape, (9, 1))

    def test_control_delayed(self):
        """测试延迟控制子空间的判定"""
        samples = np.zeros((9, 2))
        samples[5:] = 1.0
        control = Control(self.grid, samples)
        self.assertTrue(control.is_delayed(3))
        self.assertFalse(control.is_delayed(2))
        self.assertEqual(control.vector().shape, (18,))


if __name__ == '__main__':
    unittest.main()
