#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WaveBC 控制空间算子演算

控制 f ∈ ℱ^ξ 以时间优先的块布局存为长度 N·(k+1) 的向量 (ξ = k·h)。
所有算子显式组装为稠密矩阵，梯形权重一次性折入列缩放，
因此伴随必须使用带权公式 A* = diag(ω_in)^{-1} A^T diag(ω_out)。

包含: 连接算子 C^ξ、嵌入/限制 e^{T,ξ}、截断 X^{T,ξ} 与 Y^ξ、
斜投影 𝒫^{T,ξ} 及其对偶、翻转等距 I^T、带条件数诊断的 LU 求解。

设计模式:
- 值对象模式
- 组合模式（算子乘法）
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import lu_factor, lu_solve, svdvals
from scipy.linalg.lapack import get_lapack_funcs

import config
from .errors import InvalidInputError, SingularOperatorError
from .forward import ResponseFunction
from .grid_core import Control, SpaceTimeGrid, cumulative_integral, trapezoid_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ControlSpaceOperator:
    """
    作用在离散控制上的稠密块矩阵

    Attributes:
        grid (SpaceTimeGrid): 网格
        xi_steps (int): 定义域 ℱ^ξ 的 k（ξ = k·h）
        matrix (np.ndarray): (N·n_out) × (N·n_in) 实矩阵
        weights_in (np.ndarray): 定义域的求积权重
        weights_out (np.ndarray): 值域的求积权重
        label (str): 诊断用名称
        identity_plus_kernel (bool): 是否为 I + K·diag(ω⊗I_N) 结构
    """

    grid: SpaceTimeGrid
    xi_steps: int
    matrix: np.ndarray
    weights_in: np.ndarray
    weights_out: np.ndarray
    label: str = ''
    identity_plus_kernel: bool = False

    def __post_init__(self):
        N = self.grid.N
        rows, cols = self.matrix.shape
        if cols != N * self.weights_in.size or rows != N * self.weights_out.size:
            raise InvalidInputError(
                f"{self.label or '算子'} 矩阵形状 {self.matrix.shape} 与权重长度 "
                f"({self.weights_out.size}, {self.weights_in.size}) 不匹配"
            )

    @property
    def xi(self) -> float:
        return self.grid.node(self.xi_steps)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def apply(self, f: Union[Control, np.ndarray]) -> np.ndarray:
        """
        作用于控制

        Args:
            f: Control、(n, N) 样本或展开向量

        Returns:
            np.ndarray: 与输入同样布局的结果（Control 返回 (n_out, N) 样本）
        """
        if isinstance(f, Control):
            return (self.matrix @ f.vector()).reshape(-1, self.grid.N)
        f = np.asarray(f, dtype=float)
        if f.ndim == 2 and f.shape[1] == self.grid.N and f.shape[0] * self.grid.N == self.matrix.shape[1]:
            return (self.matrix @ f.reshape(-1)).reshape(-1, self.grid.N)
        return self.matrix @ f

    def __matmul__(self, other):
        if isinstance(other, ControlSpaceOperator):
            return ControlSpaceOperator(
                self.grid, self.xi_steps, self.matrix @ other.matrix,
                other.weights_in, self.weights_out, f"{self.label}·{other.label}",
            )
        return self.apply(other)

    def __sub__(self, other: 'ControlSpaceOperator') -> 'ControlSpaceOperator':
        return ControlSpaceOperator(
            self.grid, self.xi_steps, self.matrix - other.matrix,
            self.weights_in, self.weights_out, f"{self.label}−{other.label}",
        )

    def adjoint(self) -> 'ControlSpaceOperator':
        return weighted_adjoint(self)

    def norm(self) -> float:
        return weighted_norm(self)

    def kernel_part(self) -> np.ndarray:
        """I + K·Ω 结构中的 K·Ω 部分"""
        return self.matrix - np.eye(self.matrix.shape[0])


@dataclass(frozen=True)
class SolveResult:
    """
    LU 求解结果与条件诊断

    Attributes:
        solution (np.ndarray): 解
        rcond (float): 1-范数倒条件数估计 (LAPACK gecon)
        sigma_min (float): 带权共轭后矩阵的最小奇异值
        sigma_max (float): 带权共轭后矩阵的最大奇异值
        det_sign (float): det 的符号
        log_abs_det (float): log|det|
    """

    solution: np.ndarray = field(compare=False)
    rcond: float
    sigma_min: float
    sigma_max: float
    det_sign: float
    log_abs_det: float


def _block_weights(weights: np.ndarray, N: int) -> np.ndarray:
    return np.repeat(weights, N)


def weight_conjugated(A: ControlSpaceOperator) -> np.ndarray:
    """diag(ω_out)^{1/2} A diag(ω_in)^{-1/2}；零权重（单节点）时退化为原矩阵"""
    w_in = _block_weights(A.weights_in, A.grid.N)
    w_out = _block_weights(A.weights_out, A.grid.N)
    if np.any(w_in <= 0) or np.any(w_out <= 0):
        return A.matrix
    return np.sqrt(w_out)[:, None] * A.matrix / np.sqrt(w_in)[None, :]


def spectral_norm(matrix: np.ndarray, iterations: int = 200) -> float:
    """矩阵 2-范数；超过 SVD_DIMENSION_LIMIT 时用 B^T B 的幂迭代"""
    if matrix.size == 0:
        return 0.0
    if min(matrix.shape) <= config.SVD_DIMENSION_LIMIT:
        return float(svdvals(matrix)[0])
    rng = np.random.default_rng(config.RANDOM_SEED)
    x = rng.standard_normal(matrix.shape[1])
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iterations):
        z = matrix.T @ (matrix @ x)
        norm = np.linalg.norm(z)
        if norm == 0.0:
            return 0.0
        x = z / norm
        if abs(norm - estimate) <= 1e-12 * norm:
            estimate = norm
            break
        estimate = norm
    return float(np.sqrt(estimate))


def weighted_norm(A: ControlSpaceOperator) -> float:
    """带权 L² 空间之间的算子 2-范数"""
    return spectral_norm(weight_conjugated(A))


def _rcond(lu: np.ndarray, anorm: float) -> float:
    gecon, = get_lapack_funcs(('gecon',), (lu,))
    rcond, info = gecon(lu, anorm, norm='1')
    if info < 0:
        raise InvalidInputError(f"gecon 参数错误: info={info}")
    return float(rcond)


def _determinant(lu: np.ndarray, piv: np.ndarray) -> Tuple[float, float]:
    diagonal = np.diag(lu)
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    sign = (-1.0) ** swaps * np.prod(np.sign(diagonal))
    with np.errstate(divide='ignore'):
        log_abs = float(np.sum(np.log(np.abs(diagonal))))
    return float(sign), log_abs


def _extreme_singular_values(A: ControlSpaceOperator, lu_piv, iterations: int = 60) -> Tuple[float, float]:
    """
    最小/最大奇异值

    维数不超过 SVD_DIMENSION_LIMIT 时做完整 SVD，否则对 B^T B 做逆迭代与幂迭代。
    """
    B = weight_conjugated(A)
    n = B.shape[0]
    if n <= config.SVD_DIMENSION_LIMIT:
        values = svdvals(B)
        return float(values[-1]), float(values[0])

    # B = D_out A D_in^{-1}: B^{-1} = D_in A^{-1} D_out^{-1}, B^{-T} = D_out^{-1} A^{-T} D_in
    d_in = np.sqrt(_block_weights(A.weights_in, A.grid.N))
    d_out = np.sqrt(_block_weights(A.weights_out, A.grid.N))
    rng = np.random.default_rng(config.RANDOM_SEED)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iterations):
        y = lu_solve(lu_piv, d_in * x, trans=1) / d_out
        z = d_in * lu_solve(lu_piv, y / d_out)
        norm = np.linalg.norm(z)
        x = z / norm
        if abs(norm - estimate) <= 1e-10 * norm:
            estimate = norm
            break
        estimate = norm
    return float(1.0 / np.sqrt(estimate)), spectral_norm(B)


def factorize(A: ControlSpaceOperator, rcond_threshold: Optional[float] = None,
              singular_values: bool = True):
    """
    LU 分解并给出条件诊断

    Args:
        A (ControlSpaceOperator): 方阵算子
        rcond_threshold (Optional[float]): 低于该值判定为奇异，缺省取 config.RCOND_THRESHOLD
        singular_values (bool): 是否计算极端奇异值

    Returns:
        tuple: ((lu, piv), SolveResult 不含解)
    """
    if A.matrix.shape[0] != A.matrix.shape[1]:
        raise InvalidInputError(f"{A.label} 不是方阵: {A.matrix.shape}")
    threshold = config.RCOND_THRESHOLD if rcond_threshold is None else rcond_threshold
    lu_piv = lu_factor(A.matrix, check_finite=True)
    rcond = _rcond(lu_piv[0], float(np.linalg.norm(A.matrix, 1)))
    det_sign, log_abs_det = _determinant(*lu_piv)
    if not rcond >= threshold:
        raise SingularOperatorError(A.xi, rcond)
    if singular_values:
        sigma_min, sigma_max = _extreme_singular_values(A, lu_piv)
    else:
        sigma_min = sigma_max = float('nan')
    return lu_piv, SolveResult(None, rcond, sigma_min, sigma_max, det_sign, log_abs_det)


def solve(A: ControlSpaceOperator, g, rcond_threshold: Optional[float] = None,
          transpose: bool = False, singular_values: bool = True) -> SolveResult:
    """
    部分主元 LU 求解 A x = g（transpose 时求 A^T x = g）

    Args:
        A (ControlSpaceOperator): 方阵算子
        g: 右端，向量或多列矩阵
        rcond_threshold (Optional[float]): 奇异判定阈值
        transpose (bool): 是否求解转置系统
        singular_values (bool): 是否计算 σ_min/σ_max

    Returns:
        SolveResult: 解与诊断

    Raises:
        SingularOperatorError: rcond 低于阈值，携带 ξ
    """
    lu_piv, diagnostics = factorize(A, rcond_threshold, singular_values)
    rhs = g.vector() if isinstance(g, Control) else np.asarray(g, dtype=float)
    solution = lu_solve(lu_piv, rhs, trans=1 if transpose else 0)
    logger.debug("求解 %s: rcond=%.3e, σ_min=%.3e", A.label, diagnostics.rcond, diagnostics.sigma_min)
    return SolveResult(solution, diagnostics.rcond, diagnostics.sigma_min, diagnostics.sigma_max,
                       diagnostics.det_sign, diagnostics.log_abs_det)


def antiderivative(r: ResponseFunction) -> np.ndarray:
    """R(τ) = ∫_0^τ r，2M+1 个样本"""
    return cumulative_integral(r.as_function()).samples


def connecting_kernel(R: np.ndarray, k: int) -> np.ndarray:
    """
    C^ξ(t_i, s_j) = ½(R(2ξ − t_i − s_j) − R(|t_i − s_j|))，i, j = 0..k

    Returns:
        np.ndarray: 形状 (k+1, k+1, N, N)
    """
    i = np.arange(k + 1)
    total = 2 * k - i[:, None] - i[None, :]
    gap = np.abs(i[:, None] - i[None, :])
    return 0.5 * (R[total] - R[gap])


def _assemble(kernel: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """I + K·diag(ω⊗I_N)，K 为 (n, n, N, N) 块核"""
    n, _, N, _ = kernel.shape
    scaled = kernel * weights[None, :, None, None]
    return np.eye(n * N) + scaled.transpose(0, 2, 1, 3).reshape(n * N, n * N)


def _check_steps(grid: SpaceTimeGrid, k: int, allow_zero: bool = False) -> None:
    low = 0 if allow_zero else 1
    if int(k) != k or not low <= k <= grid.M:
        raise InvalidInputError(f"ξ 步数必须在 {low}..{grid.M} 之间，实际为 {k}")


def build_connecting(r: ResponseFunction, k: int, R: Optional[np.ndarray] = None) -> ControlSpaceOperator:
    """
    梯形离散的连接算子 C^ξ，ξ = k·h

    (C^ξ f)(t) = f(t) + ∫_0^ξ C^ξ(t, s) f(s) ds。

    Args:
        r (ResponseFunction): [0, 2T] 上的响应函数
        k (int): 1 ≤ k ≤ M（k = 0 给出 1×1 单位块）
        R (Optional[np.ndarray]): 预先算好的原函数

    Returns:
        ControlSpaceOperator: I + K·Ω 结构的算子
    """
    grid = r.grid
    _check_steps(grid, k, allow_zero=True)
    if R is None:
        R = antiderivative(r)
    weights = trapezoid_weights(k + 1, grid.h)
    matrix = _assemble(connecting_kernel(R, k), weights)
    return ControlSpaceOperator(grid, k, matrix, weights, weights, f"C^{k}", True)


def embedding_matrix(grid: SpaceTimeGrid, k: int) -> np.ndarray:
    """e^{T,ξ} 的矩阵: 左侧补零到 M+1 个样本"""
    N, M = grid.N, grid.M
    E = np.zeros(((M + 1) * N, (k + 1) * N))
    E[(M - k) * N:, :] = np.eye((k + 1) * N)
    return E


def embed(f, k: int, grid: Optional[SpaceTimeGrid] = None) -> Control:
    """
    (e^{T,ξ} f)(t) = f(t − (T − ξ))，ℱ^ξ → ℱ^T

    Args:
        f: ℱ^ξ 中的控制样本，形状 (k+1, N)
        k (int): ξ 步数
        grid (Optional[SpaceTimeGrid]): ℱ^T 的网格（f 为 Control 时可省略）

    Returns:
        Control: ℱ^T 中的控制
    """
    if isinstance(f, Control):
        grid = grid or f.grid
        samples = f.samples
    else:
        samples = np.asarray(f, dtype=float)
    if grid is None:
        raise InvalidInputError("嵌入需要目标网格")
    _check_steps(grid, k, allow_zero=True)
    if samples.ndim == 1 and grid.N == 1:
        samples = samples.reshape(-1, 1)
    if samples.shape != (k + 1, grid.N):
        raise InvalidInputError(f"嵌入的控制应有 {k + 1} 个样本，实际为 {samples.shape}")
    out = np.zeros((grid.M + 1, grid.N))
    out[grid.M - k:] = samples
    return Control(grid, out)


def restrict(f: Control, k: int) -> np.ndarray:
    """
    ((e^{T,ξ})* f)(t) = f(t + (T − ξ))，ℱ^T → ℱ^ξ

    Returns:
        np.ndarray: 形状 (k+1, N) 的样本
    """
    if not isinstance(f, Control):
        raise InvalidInputError("限制的输入必须是 ℱ^T 中的控制")
    _check_steps(f.grid, k, allow_zero=True)
    return np.array(f.samples[f.grid.M - k:])


def cutoff(grid: SpaceTimeGrid, k: int) -> ControlSpaceOperator:
    """X^{T,ξ}: 把 t < T−ξ 处的样本置零"""
    _check_steps(grid, k, allow_zero=True)
    weights = trapezoid_weights(grid.M + 1, grid.h)
    mask = np.zeros(grid.M + 1)
    mask[grid.M - k:] = 1.0
    matrix = np.diag(_block_weights(mask, grid.N))
    return ControlSpaceOperator(grid, grid.M, matrix, weights, weights, f"X^{k}")


def wave_cutoff(grid: SpaceTimeGrid, k: int) -> ControlSpaceOperator:
    """Y^ξ: 把 x > ξ 处的空间样本置零"""
    _check_steps(grid, k, allow_zero=True)
    weights = trapezoid_weights(grid.M + 1, grid.h)
    mask = np.zeros(grid.M + 1)
    mask[: k + 1] = 1.0
    matrix = np.diag(_block_weights(mask, grid.N))
    return ControlSpaceOperator(grid, grid.M, matrix, weights, weights, f"Y^{k}")


def shortened_connecting(C_T: ControlSpaceOperator, k: int) -> ControlSpaceOperator:
    """
    嵌入关系 C'^ξ = (e^{T,ξ})* C^T e^{T,ξ} 的矩阵实现

    与梯形 C^ξ 只在连接节点 t = T−ξ 的列权重上不同（h 对 h/2），
    由它构造的投影满足所有代数恒等式到舍入误差。
    """
    grid = C_T.grid
    _check_steps(grid, k, allow_zero=True)
    N, M = grid.N, grid.M
    start = (M - k) * N
    matrix = np.array(C_T.matrix[start:, start:])
    weights = np.array(C_T.weights_in[M - k:])
    return ControlSpaceOperator(grid, k, matrix, weights, weights, f"C'^{k}", True)


def weighted_adjoint(A: ControlSpaceOperator) -> ControlSpaceOperator:
    """
    带权伴随 A* = diag(ω_in)^{-1} A^T diag(ω_out)

    满足 ⟨Af, g⟩_out = ⟨f, A*g⟩_in，⟨f, g⟩ = Σ_j ω_j f_j^T g_j。
    """
    w_in = _block_weights(A.weights_in, A.grid.N)
    w_out = _block_weights(A.weights_out, A.grid.N)
    if np.any(w_in == 0) or np.any(w_out == 0):
        if A.matrix.shape == (A.grid.N, A.grid.N) and A.weights_in.size == A.weights_out.size == 1:
            return ControlSpaceOperator(A.grid, A.xi_steps, A.matrix.T.copy(), A.weights_out,
                                        A.weights_in, f"{A.label}*", A.identity_plus_kernel)
        raise InvalidInputError(f"{A.label} 含零权重，无法构造带权伴随")
    matrix = (A.matrix.T * w_out[None, :]) / w_in[:, None]
    return ControlSpaceOperator(A.grid, A.xi_steps, matrix, A.weights_out, A.weights_in,
                                f"{A.label}*", A.identity_plus_kernel)


def inner_product(f: np.ndarray, g: np.ndarray, weights: np.ndarray) -> float:
    """离散梯形内积 Σ_j ω_j f_j^T g_j，f、g 形状 (n, N)"""
    return float(np.sum(weights[:, None] * f * g))


def flip_isometry(grid: SpaceTimeGrid, k: Optional[int] = None) -> ControlSpaceOperator:
    """(I^ξ y)(t) = y(ξ − t)，块反序置换矩阵"""
    k = grid.M if k is None else k
    _check_steps(grid, k, allow_zero=True)
    N = grid.N
    P = np.zeros(((k + 1) * N, (k + 1) * N))
    for m in range(k + 1):
        P[m * N:(m + 1) * N, (k - m) * N:(k - m + 1) * N] = np.eye(N)
    weights = trapezoid_weights(k + 1, grid.h)
    return ControlSpaceOperator(grid, k, P, weights, weights, f"I^{k}")


def build_projector(r: ResponseFunction, k: int, dual: bool = False,
                    C_T: Optional[ControlSpaceOperator] = None,
                    rcond_threshold: Optional[float] = None) -> ControlSpaceOperator:
    """
    斜投影 𝒫^{T,ξ} = e [C'^ξ]^{-1} e* C^T，对偶时以 (C^T)* 代替 C^T

    C'^ξ 是 C^T 的压缩，因此 P² = P、值域、嵌套与
    C^T 𝒫 = (𝒫_♭)* C^T 均在 LU 舍入误差内精确成立。

    Args:
        r (ResponseFunction): 响应函数
        k (int): ξ 步数
        dual (bool): 是否构造对偶投影 𝒫_♭
        C_T (Optional[ControlSpaceOperator]): 预先组装的 C^T
        rcond_threshold (Optional[float]): 奇异判定阈值

    Returns:
        ControlSpaceOperator: ℱ^T 上的投影

    Raises:
        SingularOperatorError: C'^ξ 数值奇异，携带 ξ
    """
    grid = r.grid
    _check_steps(grid, k, allow_zero=True)
    if C_T is None:
        C_T = build_connecting(r, grid.M)
    base = weighted_adjoint(C_T) if dual else C_T
    short = shortened_connecting(base, k)
    E = embedding_matrix(grid, k)
    result = solve(short, E.T @ base.matrix, rcond_threshold, singular_values=False)
    matrix = E @ result.solution
    label = f"P_♭^{k}" if dual else f"P^{k}"
    return ControlSpaceOperator(grid, k, matrix, C_T.weights_in, C_T.weights_in, label)


def control_operator_from_kernel(w, grid: Optional[SpaceTimeGrid] = None) -> ControlSpaceOperator:
    """
    由控制三角形上的核组装 W^T: ℱ^T → 𝓗^T

    (W f)(x_i) = f(T − x_i) + Σ_l ω^{(i)}_l w(x_i, s_l) f(T − s_l)，
    ω^{(i)} 为 [x_i, T] 上的梯形权重。
    """
    grid = grid or w.grid
    M, N, h = grid.M, grid.N, grid.h
    values = w.values
    matrix = np.zeros(((M + 1) * N, (M + 1) * N))
    for i in range(M + 1):
        weights = trapezoid_weights(M - i + 1, h)
        s = np.arange(i, M + 1)
        columns = M - s
        rows = slice(i * N, (i + 1) * N)
        for l, m in enumerate(columns):
            matrix[rows, m * N:(m + 1) * N] += weights[l] * values[i, s[l]]
        matrix[rows, (M - i) * N:(M - i + 1) * N] += np.eye(N)
    weights = trapezoid_weights(M + 1, h)
    return ControlSpaceOperator(grid, M, matrix, weights, weights, "W")


def synthesize_control(W: ControlSpaceOperator, y: np.ndarray,
                       rcond_threshold: Optional[float] = None) -> Control:
    """
    求边界控制 f 使 W f = y（在 T 时刻产生给定波形）

    Args:
        W (ControlSpaceOperator): 控制算子
        y (np.ndarray): 目标波形样本 (M+1, N)

    Returns:
        Control: 控制
    """
    grid = W.grid
    y = np.asarray(y, dtype=float).reshape(grid.M + 1, grid.N)
    result = solve(W, y.reshape(-1), rcond_threshold, singular_values=False)
    return Control(grid, result.solution.reshape(grid.M + 1, grid.N))


def apply_response_operator(r: ResponseFunction, f: np.ndarray) -> np.ndarray:
    """
    (R^{2T} f)(t_j) = −f'(t_j) + ∫_0^{t_j} r(t_j − s) f(s) ds，j = 0..2M

    Args:
        r (ResponseFunction): 响应函数
        f (np.ndarray): [0, 2T] 上的控制样本 (2M+1, N)，f(0) = 0

    Returns:
        np.ndarray: (2M+1, N)
    """
    grid = r.grid
    f = np.asarray(f, dtype=float).reshape(2 * grid.M + 1, grid.N)
    derivative = np.gradient(f, grid.h, axis=0, edge_order=2)
    out = -derivative
    for j in range(1, 2 * grid.M + 1):
        weights = trapezoid_weights(j + 1, grid.h)
        s = np.arange(j + 1)
        out[j] += np.einsum('l,lab,lb->a', weights, r.samples[j - s], f[s])
    return out


__all__ = [
    'ControlSpaceOperator',
    'SolveResult',
    'weight_conjugated',
    'spectral_norm',
    'weighted_norm',
    'factorize',
    'solve',
    'antiderivative',
    'connecting_kernel',
    'build_connecting',
    'embedding_matrix',
    'embed',
    'restrict',
    'cutoff',
    'wave_cutoff',
    'shortened_connecting',
    'weighted_adjoint',
    'inner_product',
    'flip_isometry',
    'build_projector',
    'control_operator_from_kernel',
    'synthesize_control',
    'apply_response_operator',
]
