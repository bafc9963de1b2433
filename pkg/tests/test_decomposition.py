#!/usr/bin/env python3
"""
分解测试
测试双二次秩一分解、Tucker 秩、HOSVD、独立因子核心与秩保持检查
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

from src.core.errors import DimensionMismatch, RankDeficient
from src.core.tensor import (
    Tensor4,
    diagonal,
    frobenius,
    identity,
    quartic_form,
    random_biquadratic,
    random_unit,
    rank_one,
)
from src.decomposition.rank_one import (
    BQDecomposition,
    RankOneTerm,
    bq_rank_one_decompose,
    factor_matrices,
    make_term,
    reconstruct,
    relative_error,
    term_bound,
    tucker_ranks,
)
from src.decomposition.tucker import (
    INDEPENDENT,
    ORTHONORMAL,
    br_preservation_check,
    hosvd,
    independent_core,
    mode_multiply,
    transport,
)
from src.eigen.m_eigen import SolverConfig, largest_m_eigenvalue
from src.kernels.dense import matrix_rank
from src.oracle.brute_force import naive_mode_multiply


def _orthogonal(size, rng):
    Q, _ = np.linalg.qr(rng.standard_normal((size, size)))
    return Q


class TestRankOneDecomposition:
    """双二次秩一分解测试类"""

    def setup_method(self):
        self.rng = np.random.default_rng(31)

    def test_rank_one_input(self):
        x0, y0 = random_unit(2, self.rng), random_unit(3, self.rng)
        D = bq_rank_one_decompose(rank_one(x0, y0))
        assert len(D) == 1
        assert D.reconstruction_error <= 1e-10
        assert D.coefficient_sum == pytest.approx(1.0)
        assert abs(D.terms[0].x @ x0) == pytest.approx(1.0)

    def test_identity(self):
        D = bq_rank_one_decompose(identity(2, 2))
        assert D.reconstruction_error <= 1e-10
        assert len(D) <= term_bound(2, 2) == 12
        assert D.coefficient_sum == pytest.approx(4.0)

    def test_zero_tensor(self):
        D = bq_rank_one_decompose(identity(2, 2) * 0.0)
        assert len(D) == 0
        assert D.reconstruction_error == 0.0

    @given(seed=st.integers(0, 2 ** 32 - 1), dims=st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)]))
    @settings(max_examples=15, deadline=None)
    def test_random_reconstruction(self, seed, dims):
        m, n = dims
        A = random_biquadratic(m, n, np.random.default_rng(seed))
        D = bq_rank_one_decompose(A)
        assert D.reconstruction_error <= 1e-8
        assert len(D) <= term_bound(m, n)
        for term in D.terms:
            assert np.linalg.norm(term.x) == pytest.approx(1.0)
            assert np.linalg.norm(term.y) == pytest.approx(1.0)

    @pytest.mark.parametrize('m', [1, 2, 3, 4])
    @pytest.mark.parametrize('n', [1, 2, 3, 4])
    def test_all_small_shapes(self, m, n):
        """m, n 取 1..4，每种形状 7 个随机实例"""
        rng = np.random.default_rng(100 * m + n)
        for _ in range(7):
            A = random_biquadratic(m, n, rng)
            D = bq_rank_one_decompose(A)
            assert D.reconstruction_error <= 1e-8
            assert relative_error(A, reconstruct(D)) <= 1e-8
            assert len(D) <= term_bound(m, n)

    def test_term_bound_values(self):
        assert term_bound(3, 3) == 54
        assert term_bound(2, 3) == 18
        assert term_bound(1, 1) == 1

    def test_reconstruct_empty_and_single(self):
        empty = BQDecomposition(2, 2, ())
        assert frobenius(reconstruct(empty)) == 0.0
        single = BQDecomposition(2, 2, (RankOneTerm(2.0, np.array([1.0, 0.0]), np.array([1.0, 0.0])),))
        expected = diagonal(2, 2, [[2.0, 0.0], [0.0, 0.0]])
        assert_allclose(reconstruct(single).entries, expected.entries)

    def test_make_term_absorbs_norms(self):
        term = make_term(1.5, [0.0, -2.0], [3.0])
        assert term.coef == pytest.approx(1.5 * 4.0 * 9.0)
        assert_allclose(term.x, [0.0, 1.0])
        assert make_term(1.0, [0.0, 0.0], [1.0]) is None

    def test_dict_roundtrip_preserves_terms(self):
        A = random_biquadratic(2, 2, self.rng)
        D = bq_rank_one_decompose(A)
        back = BQDecomposition.from_dict(D.to_dict())
        assert len(back) == len(D)
        assert relative_error(A, reconstruct(back)) <= 1e-8

    def test_relative_error_shape_check(self):
        with pytest.raises(DimensionMismatch):
            relative_error(identity(2, 2), identity(2, 3))


class TestTuckerRanks:
    """Tucker 秩与因子矩阵秩测试类"""

    def setup_method(self):
        self.rng = np.random.default_rng(41)

    def test_identity_ranks(self):
        assert tucker_ranks(identity(3, 2)) == (3, 2)

    def test_rank_one_ranks(self):
        assert tucker_ranks(rank_one([1.0, 2.0, 0.0], [1.0, -1.0])) == (1, 1)

    def test_zero_ranks(self):
        assert tucker_ranks(Tensor4(np.zeros((2, 2, 2, 2)))) == (0, 0)

    def test_factor_ranks_match_tucker_ranks(self):
        for A in (rank_one([1.0, 1.0], [0.0, 1.0]), identity(2, 2), random_biquadratic(2, 3, self.rng)):
            X, Y = factor_matrices(bq_rank_one_decompose(A))
            assert (matrix_rank(X, 1e-8), matrix_rank(Y, 1e-8)) == tucker_ranks(A)

    def test_low_rank_tensor(self):
        """核心 2x2 经 3x2 因子提升后 Tucker 秩为 (2, 2)"""
        B = random_biquadratic(2, 2, self.rng)
        A = mode_multiply(B, self.rng.standard_normal((3, 2)), self.rng.standard_normal((3, 2)))
        assert tucker_ranks(A) == (2, 2)


class TestModeMultiply:
    """多线性乘积测试类"""

    def setup_method(self):
        self.rng = np.random.default_rng(55)

    def test_identity_factors(self):
        A = random_biquadratic(2, 3, self.rng)
        assert_allclose(mode_multiply(A, np.eye(2), np.eye(3)).entries, A.entries, atol=1e-14)

    def test_matches_naive_loop(self):
        B = random_biquadratic(2, 2, self.rng)
        P, Q = self.rng.standard_normal((3, 2)), self.rng.standard_normal((2, 2))
        assert_allclose(mode_multiply(B, P, Q).entries, naive_mode_multiply(B, P, Q), atol=1e-12)

    def test_identity_core_quartic(self):
        """f(x, y) = |P^T x|^2 |Q^T y|^2"""
        P = _orthogonal(3, self.rng)[:, :2]
        Q = _orthogonal(3, self.rng)[:, :2]
        A = mode_multiply(identity(2, 2), P, Q)
        x, y = self.rng.standard_normal(3), self.rng.standard_normal(3)
        expected = np.sum((P.T @ x) ** 2) * np.sum((Q.T @ y) ** 2)
        assert_allclose(quartic_form(A, x, y), expected, rtol=1e-12)

    def test_shape_check(self):
        with pytest.raises(DimensionMismatch):
            mode_multiply(identity(2, 2), np.eye(3), np.eye(2))


class TestHosvd:
    """HOSVD 测试类"""

    def setup_method(self):
        self.rng = np.random.default_rng(63)

    def test_full_size_is_exact(self):
        A = random_biquadratic(3, 2, self.rng)
        form = hosvd(A, 3, 2)
        assert form.kind == ORTHONORMAL
        assert form.reconstruction_error <= 1e-10
        assert frobenius(form.core) == pytest.approx(frobenius(A), rel=1e-12)
        assert_allclose(form.P.T @ form.P, np.eye(3), atol=1e-12)

    def test_rank_one_core(self):
        x0, y0 = random_unit(3, self.rng), random_unit(2, self.rng)
        form = hosvd(rank_one(x0, y0), 1, 1)
        assert abs(form.core.entries[0, 0, 0, 0]) == pytest.approx(1.0)
        assert abs(form.P[:, 0] @ x0) == pytest.approx(1.0)
        assert form.exact

    def test_truncation_at_tucker_ranks(self):
        B = random_biquadratic(2, 2, self.rng)
        A = mode_multiply(B, self.rng.standard_normal((4, 2)), self.rng.standard_normal((3, 2)))
        r1, r2 = tucker_ranks(A)
        assert hosvd(A, r1, r2).reconstruction_error <= 1e-8

    def test_invalid_dims(self):
        with pytest.raises(DimensionMismatch):
            hosvd(identity(2, 2), 3, 1)

    def test_preserves_largest_m_eigenvalue(self):
        """正交 HOSVD 核心与原张量有相同的最大 M-特征值"""
        A = random_biquadratic(2, 2, self.rng)
        form = hosvd(A, 2, 2)
        config = SolverConfig(starts=16, seed=2)
        assert largest_m_eigenvalue(form.core, config).lam == pytest.approx(
            largest_m_eigenvalue(A, config).lam, rel=1e-6)


class TestIndependentCore:
    """独立因子核心与秩保持测试类"""

    def setup_method(self):
        self.rng = np.random.default_rng(88)

    def test_recovers_core(self):
        B = random_biquadratic(2, 2, self.rng)
        P, Q = self.rng.standard_normal((4, 2)), self.rng.standard_normal((3, 2))
        form = independent_core(mode_multiply(B, P, Q), P, Q)
        assert form.kind == INDEPENDENT
        assert form.exact
        assert_allclose(form.core.entries, B.entries, atol=1e-8)

    def test_orthonormal_factors_match_hosvd_core(self):
        A = random_biquadratic(2, 2, self.rng)
        reference = hosvd(A, 2, 2)
        form = independent_core(A, reference.P, reference.Q)
        assert_allclose(form.core.entries, reference.core.entries, atol=1e-10)

    def test_rank_deficient_factor(self):
        A = random_biquadratic(3, 2, self.rng)
        with pytest.raises(RankDeficient):
            independent_core(A, np.ones((3, 2)), np.eye(2))

    def test_outside_span_reports_error(self):
        A = random_biquadratic(3, 3, self.rng)
        P = np.eye(3)[:, :2]
        form = independent_core(A, P, np.eye(3))
        assert not form.exact

    def test_transport_rank_one(self):
        D = bq_rank_one_decompose(rank_one([1.0, 0.0], [0.0, 1.0]))
        P = np.array([[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        moved = transport(D, P, np.eye(2))
        assert len(moved) == 1
        assert moved.terms[0].coef == pytest.approx(4.0)

    def test_br_preservation_orthogonal(self):
        A = random_biquadratic(3, 2, self.rng)
        report = br_preservation_check(A, _orthogonal(3, self.rng), _orthogonal(2, self.rng))
        assert report.satisfied
        assert report.core_error <= 1e-8

    def test_br_preservation_lifted_core(self):
        B = random_biquadratic(2, 2, self.rng)
        P, Q = self.rng.standard_normal((4, 2)), self.rng.standard_normal((4, 2))
        report = br_preservation_check(mode_multiply(B, P, Q), P, Q)
        assert report.pull_error <= 1e-8
        assert report.push_error <= 1e-8
        assert report.satisfied

    def test_br_preservation_rank_one_core(self):
        B = rank_one([1.0, 0.5], [0.3, 1.0])
        P, Q = self.rng.standard_normal((3, 2)), self.rng.standard_normal((3, 2))
        report = br_preservation_check(mode_multiply(B, P, Q), P, Q)
        assert report.terms_core == 1
        assert report.pushed_terms == 1
