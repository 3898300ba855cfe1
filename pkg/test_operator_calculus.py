#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
控制空间算子演算测试
"""

import unittest
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose
from scipy.linalg import svdvals

import config
from modules.errors import InvalidInputError, SingularOperatorError
from modules.forward import ResponseFunction, forward_response, solve_goursat
from modules.grid_core import Control, MatrixFunction1D, SpaceTimeGrid, trapezoid_weights
from modules.operator_calculus import (
    ControlSpaceOperator,
    apply_response_operator,
    build_connecting,
    control_operator_from_kernel,
    embed,
    embedding_matrix,
    factorize,
    flip_isometry,
    inner_product,
    restrict,
    shortened_connecting,
    solve,
    synthesize_control,
    weight_conjugated,
    weighted_adjoint,
)
from modules.characterization import check_projector_identities


def nonsymmetric_response(M=40, T=1.0):
    """V(x) = [[sin x, 0.3], [−0.1, cos x]] 的响应函数"""
    grid = SpaceTimeGrid(2, T, M)
    x = grid.space_nodes
    samples = np.stack([np.array([[np.sin(v), 0.3], [-0.1, np.cos(v)]]) for v in x])
    V = MatrixFunction1D.on_space(grid, samples)
    return V, forward_response(V, grid)


class TestConnectingOperator(unittest.TestCase):
    def setUp(self):
        """测试前的准备工作"""
        self.V, self.r = nonsymmetric_response()
        self.grid = self.r.grid
        self.rng = np.random.default_rng(7)

    def test_zero_response_identity(self):
        """测试零响应给出单位算子"""
        C = build_connecting(ResponseFunction.zeros(self.grid), 10)
        assert_allclose(C.matrix, np.eye(22))
        self.assertAlmostEqual(C.xi, 10 * self.grid.h)

    def test_constant_response_kernel(self):
        """测试 r ≡ r₀ 时 C^ξ(t, s) = r₀(ξ − max(t, s))"""
        grid = SpaceTimeGrid(1, 1.0, 20)
        r0, k = 0.7, 12
        C = build_connecting(ResponseFunction(grid, np.full((41, 1, 1), r0)), k)
        kernel = C.kernel_part() / C.weights_in[None, :]
        t = grid.space_nodes[: k + 1]
        expected = r0 * (C.xi - np.maximum(t[:, None], t[None, :]))
        assert_allclose(kernel, expected, atol=1e-13)
        self.assertAlmostEqual(kernel[k, k], 0.0, places=13)

    def test_weighted_adjoint(self):
        """测试 ⟨Af, g⟩ = ⟨f, A*g⟩"""
        k = 12
        C = build_connecting(self.r, k)
        weights = trapezoid_weights(k + 1, self.grid.h)
        f = self.rng.standard_normal((k + 1, 2))
        g = self.rng.standard_normal((k + 1, 2))
        left = inner_product(C.apply(f), g, weights)
        right = inner_product(f, weighted_adjoint(C).apply(g), weights)
        self.assertAlmostEqual(left, right, places=12)

    def test_shortened_differs_at_junction(self):
        """测试压缩算子只在连接节点的列权重上与梯形算子不同"""
        k = 15
        C_T = build_connecting(self.r, self.grid.M)
        short = shortened_connecting(C_T, k)
        trapezoid = build_connecting(self.r, k)
        assert_allclose(short.matrix[:, 2:], trapezoid.matrix[:, 2:], atol=1e-14)
        self.assertAlmostEqual(short.weights_in[0], self.grid.h)
        self.assertAlmostEqual(trapezoid.weights_in[0], 0.5 * self.grid.h)
        kernel_column = trapezoid.matrix[2:, :2] / (0.5 * self.grid.h)
        assert_allclose(short.matrix[2:, :2], self.grid.h * kernel_column, atol=1e-14)

    def test_invalid_steps(self):
        """测试 ξ 步数越界"""
        with self.assertRaises(InvalidInputError):
            build_connecting(self.r, self.grid.M + 1)


class TestEmbedding(unittest.TestCase):
    def setUp(self):
        """测试前的准备工作"""
        self.grid = SpaceTimeGrid(2, 1.0, 10)

    def test_embed_restrict(self):
        """测试嵌入后限制还原"""
        g = np.arange(8, dtype=float).reshape(4, 2) + 1.0
        f = embed(g, 3, self.grid)
        self.assertTrue(f.is_delayed(3))
        assert_allclose(f.samples[:7], 0.0)
        assert_allclose(restrict(f, 3), g)
        E = embedding_matrix(self.grid, 3)
        assert_allclose(E @ g.ravel(), f.samples.ravel())
        assert_allclose(E.T @ f.samples.ravel(), g.ravel())

    def test_embed_shape(self):
        """测试嵌入形状检查"""
        with self.assertRaises(InvalidInputError):
            embed(np.zeros((3, 2)), 3, self.grid)

    def test_flip_involution(self):
        """测试翻转等距是对合"""
        flip = flip_isometry(self.grid)
        assert_allclose((flip @ flip).matrix, np.eye(22))


class TestSolvers(unittest.TestCase):
    def test_singular_operator(self):
        """测试奇异算子报告 ξ"""
        grid = SpaceTimeGrid(1, 1.0, 10)
        weights = trapezoid_weights(2, grid.h)
        A = ControlSpaceOperator(grid, 1, np.ones((2, 2)), weights, weights, "A")
        with self.assertRaises(SingularOperatorError) as context:
            factorize(A)
        self.assertAlmostEqual(context.exception.xi, grid.h)
        self.assertIsInstance(context.exception, ArithmeticError)

    def test_solve_and_transpose(self):
        """测试求解与转置求解"""
        _, r = nonsymmetric_response(M=20)
        C = build_connecting(r, 20)
        g = np.linspace(-1.0, 1.0, C.matrix.shape[0])
        result = solve(C, g)
        assert_allclose(C.matrix @ result.solution, g, atol=1e-12)
        transposed = solve(C, g, transpose=True, singular_values=False)
        assert_allclose(C.matrix.T @ transposed.solution, g, atol=1e-12)
        self.assertGreater(result.rcond, 1e-3)
        self.assertEqual(result.det_sign, 1.0)

    def test_iterative_singular_values(self):
        """测试超过 SVD 维数上限时的迭代估计"""
        grid = SpaceTimeGrid(1, 1.0, 11)
        n = 12
        weights = trapezoid_weights(n, grid.h)
        rng = np.random.default_rng(3)
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        spectrum = np.concatenate([[0.1], np.arange(1.0, n)])
        B = Q @ np.diag(spectrum) @ Q.T
        d = np.sqrt(weights)
        A = ControlSpaceOperator(grid, 11, B * d[None, :] / d[:, None], weights, weights, "A")
        assert_allclose(weight_conjugated(A), B, atol=1e-12)
        with mock.patch.object(config, 'SVD_DIMENSION_LIMIT', 5):
            _, info = factorize(A)
        self.assertAlmostEqual(info.sigma_min, 0.1, delta=1e-6)
        self.assertAlmostEqual(info.sigma_max, float(n - 1), delta=1e-6)
        self.assertAlmostEqual(info.sigma_max, svdvals(B)[0], delta=1e-6)


class TestProjectors(unittest.TestCase):
    def test_identities(self):
        """测试投影的代数恒等式到舍入误差"""
        _, r = nonsymmetric_response()
        checks = check_projector_identities(r, 20, k_outer=30)
        self.assertLess(checks['idempotency'], 1e-8)
        self.assertLess(checks['range'], 1e-8)
        self.assertLess(checks['nesting'], 1e-8)
        self.assertLess(checks['connecting_intertwining'], 1e-8)


class TestControlOperator(unittest.TestCase):
    def test_free_control_operator(self):
        """测试零核时 W 就是翻转"""
        grid = SpaceTimeGrid(2, 1.0, 12)
        zero = MatrixFunction1D.on_space(grid, np.zeros((13, 2, 2)))
        W = control_operator_from_kernel(solve_goursat(zero, grid).control_triangle())
        assert_allclose(W.matrix, flip_isometry(grid).matrix)

    def test_synthesize_control(self):
        """测试由目标波形反求控制"""
        V, _ = nonsymmetric_response(M=30)
        grid = V.grid
        W = control_operator_from_kernel(solve_goursat(V, grid).control_triangle())
        f = np.stack([np.sin(grid.space_nodes), grid.space_nodes ** 2], axis=1)
        y = W.apply(f)
        control = synthesize_control(W, y)
        self.assertIsInstance(control, Control)
        assert_allclose(control.samples, f, atol=1e-10)

    def test_response_operator_free(self):
        """测试零响应时 R f = −f′"""
        grid = SpaceTimeGrid(1, 1.0, 20)
        t = grid.time_nodes
        out = apply_response_operator(ResponseFunction.zeros(grid), t ** 2)
        assert_allclose(out[:, 0], -2.0 * t, atol=1e-12)


if __name__ == '__main__':
    unittest.main()
