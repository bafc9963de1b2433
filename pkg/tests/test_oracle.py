#!/usr/bin/env python3
"""
暴力参考测试
用角度网格穷举与逐下标循环版本交叉检验生产代码路径
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

# 添加项目根目录到路径
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.algebra.product import raw_product
from src.core.errors import DimensionTooLarge
from src.core.orchestrator import BiquadraticOrchestrator
from src.core.tensor import (
    ThirdOrderTensor,
    diagonal,
    flatten_square,
    identity,
    quartic_form,
    random_biquadratic,
)
from src.decomposition.tucker import mode_multiply
from src.eigen.m_eigen import SolverConfig, spectral_norm_interval, third_order_spectral_norm
from src.oracle.brute_force import (
    GridSpec,
    grid_tolerance,
    naive_flatten,
    naive_mode_multiply,
    naive_product,
    naive_quartic,
    quartic_extrema_grid,
    sphere_grid,
    third_order_spectral_norm_brute,
)


class TestGrid:
    """角度网格测试类"""

    def setup_method(self):
        self.spec = GridSpec(resolution=60, samples=200, seed=1)

    def test_grid_points_are_unit(self):
        for dim in (1, 2, 3):
            points = sphere_grid(dim, 24)
            assert_allclose(np.linalg.norm(points, axis=1), 1.0)

    def test_grid_dimension_limit(self):
        with pytest.raises(DimensionTooLarge):
            sphere_grid(4, 10)
        with pytest.raises(DimensionTooLarge):
            quartic_extrema_grid(identity(4, 2), self.spec)

    def test_identity_extremes(self):
        lo, hi, _, _ = quartic_extrema_grid(identity(2, 3), self.spec)
        assert lo == pytest.approx(1.0)
        assert hi == pytest.approx(1.0)

    def test_negative_identity(self):
        lo, hi, _, _ = quartic_extrema_grid(-identity(2, 2), self.spec)
        assert lo == pytest.approx(-1.0)
        assert hi == pytest.approx(-1.0)

    def test_diagonal_maximum_and_argmax(self):
        A = diagonal(2, 2, [[5.0, 1.0], [1.0, 1.0]])
        lo, hi, arg_lo, arg_hi = quartic_extrema_grid(A, self.spec)
        assert hi == pytest.approx(5.0)
        assert lo == pytest.approx(1.0, abs=1e-2)
        assert quartic_form(A, *arg_hi) == pytest.approx(hi)
        assert quartic_form(A, *arg_lo) == pytest.approx(lo)

    def test_grid_tolerance_model(self):
        expected = 0.5 * 2 * 1.0 * (np.pi / 60) ** 2
        assert grid_tolerance(identity(2, 2), self.spec) == pytest.approx(expected)

    def test_deterministic(self):
        A = random_biquadratic(2, 2, np.random.default_rng(0))
        first = quartic_extrema_grid(A, self.spec)
        second = quartic_extrema_grid(A, self.spec)
        assert first[0] == second[0] and first[1] == second[1]


class TestSolverAgainstGrid:
    """M-特征值搜索与网格穷举的交叉比对"""

    def setup_method(self):
        self.spec = GridSpec(resolution=90, samples=500, seed=2)
        self.config = SolverConfig(starts=16, seed=5)

    @given(seed=st.integers(0, 2 ** 32 - 1), dims=st.sampled_from([(2, 2), (2, 3), (3, 2)]))
    @settings(max_examples=8, deadline=None)
    def test_spectral_lower_bound_matches_grid(self, seed, dims):
        m, n = dims
        A = random_biquadratic(m, n, np.random.default_rng(seed))
        interval = spectral_norm_interval(A, self.config)
        lo, hi, _, _ = quartic_extrema_grid(A, self.spec)
        grid_value = max(abs(lo), abs(hi))
        assert interval.lower >= grid_value - grid_tolerance(A, self.spec) - 1e-10
        assert grid_value <= interval.upper + 1e-10

    def test_cross_check_command(self):
        orchestrator = BiquadraticOrchestrator({
            'solver': {'starts': 16, 'seed': 3},
            'oracle': {'resolution': 60, 'samples': 200},
        })
        A = random_biquadratic(2, 2, np.random.default_rng(4))
        result = orchestrator.cross_check(A)
        assert result['agrees']
        assert result['tolerance'] > 0

    def test_third_order_single_entry(self):
        assert third_order_spectral_norm_brute(ThirdOrderTensor([[[2.0]]]), self.spec) == pytest.approx(2.0)

    def test_third_order_zero(self):
        assert third_order_spectral_norm_brute(ThirdOrderTensor(np.zeros((2, 2, 2))), self.spec) == 0.0

    def test_third_order_matches_contraction(self):
        """三阶谱范数 = 自缩并张量最大 M-特征值的平方根"""
        T = ThirdOrderTensor(np.random.default_rng(6).standard_normal((2, 2, 2)))
        spec = GridSpec(resolution=180, samples=500, seed=0)
        brute = third_order_spectral_norm_brute(T, spec)
        solved = third_order_spectral_norm(T, self.config)
        assert brute <= solved * (1.0 + 1e-10)
        assert brute >= solved * (1.0 - 1e-3)

    def test_third_order_dimension_limit(self):
        with pytest.raises(DimensionTooLarge):
            third_order_spectral_norm_brute(ThirdOrderTensor(np.zeros((4, 2, 2))), self.spec)


class TestNaiveTwins:
    """逐下标循环版本与向量化实现的比对"""

    @given(seed=st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_quartic_and_flatten(self, seed):
        rng = np.random.default_rng(seed)
        A = random_biquadratic(2, 3, rng)
        x, y = rng.standard_normal(2), rng.standard_normal(3)
        assert_allclose(naive_quartic(A, x, y), quartic_form(A, x, y), rtol=1e-12, atol=1e-12)
        assert_allclose(naive_flatten(A), flatten_square(A))

    @given(seed=st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_product_and_mode_multiply(self, seed):
        rng = np.random.default_rng(seed)
        A, B = random_biquadratic(2, 2, rng), random_biquadratic(2, 2, rng)
        assert_allclose(naive_product(A, B), raw_product(A, B).entries, atol=1e-12)
        P, Q = rng.standard_normal((3, 2)), rng.standard_normal((2, 2))
        assert_allclose(naive_mode_multiply(A, P, Q), mode_multiply(A, P, Q).entries, atol=1e-11)

    def test_identity_twins(self):
        unit = identity(2, 2)
        assert_allclose(naive_product(unit, unit), unit.entries)
        assert_allclose(naive_mode_multiply(unit, np.eye(2), np.eye(2)), unit.entries)
        assert naive_quartic(unit, [0.6, 0.8], [1.0, 0.0]) == pytest.approx(1.0)
