"""Closed-form DBB statistics against hand arithmetic and Monte Carlo oracles."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbb.closed_form import TrueProbSequence, dbb_closed_form, point_mse, total_mass, weights
from dbb.estimators import PosteriorState, one_step_mean

valid_args = st.tuples(
    st.integers(min_value=1, max_value=200),      # tau
    st.floats(min_value=1e-6, max_value=1.0),     # lam
    st.integers(min_value=1, max_value=128),      # n
)

prob_sequences = st.lists(
    st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=12
).map(lambda p: TrueProbSequence(probs=tuple(p)))


class TestTotalMass:
    def test_worked_values(self):
        assert total_mass(2, 0.5, 8) == pytest.approx(12.5, abs=1e-12)
        assert total_mass(3, 1.0, 8) == pytest.approx(26.0, abs=1e-12)
        assert total_mass(1, 0.5, 8) == pytest.approx(9.0, abs=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            total_mass(0, 0.5, 8)
        with pytest.raises(ValueError):
            total_mass(2, 1.5, 8)
        with pytest.raises(ValueError):
            total_mass(2, 0.5, 0)

    @given(valid_args)
    @settings(max_examples=100)
    def test_matches_direct_formula(self, args):
        tau, lam, n = args
        direct = lam**tau * 2.0 + n * sum(lam ** (tau - k) for k in range(1, tau + 1))
        assert total_mass(tau, lam, n) == pytest.approx(direct, rel=1e-12)


class TestWeights:
    def test_worked_values(self):
        assert weights(2, 0.5, 8) == pytest.approx([0.04, 0.32, 0.64], abs=1e-12)
        assert weights(1, 1.0, 8) == pytest.approx([0.2, 0.8], abs=1e-12)

    @given(valid_args)
    @settings(max_examples=200)
    def test_sum_to_one_and_non_negative(self, args):
        tau, lam, n = args
        c = weights(tau, lam, n)
        assert len(c) == tau + 1
        assert all(ck >= 0.0 for ck in c)
        assert sum(c) == pytest.approx(1.0, abs=1e-12)


class TestDbbClosedForm:
    def test_symmetric_stationary(self):
        stats = dbb_closed_form(TrueProbSequence(probs=(0.5, 0.5)), 0.5, 8)
        assert stats.expectation == pytest.approx(0.5, abs=1e-12)
        assert stats.bias == pytest.approx(0.0, abs=1e-12)
        assert stats.variance == pytest.approx(0.016, abs=1e-12)
        assert stats.mse == pytest.approx(0.016, abs=1e-12)
        assert stats.total_mass == pytest.approx(12.5, abs=1e-12)

    def test_drifting_pair(self):
        stats = dbb_closed_form(TrueProbSequence(probs=(0.2, 0.8)), 0.5, 8)
        assert stats.expectation == pytest.approx(0.596, abs=1e-12)
        assert stats.bias == pytest.approx(-0.204, abs=1e-12)

    def test_stationary_prior_match_unbiased(self):
        for p in (0.0, 0.3, 0.5, 1.0):
            stats = dbb_closed_form(TrueProbSequence(probs=(p,), prior_mean=p), 1.0, 8)
            assert stats.bias == pytest.approx(0.0, abs=1e-12)

    def test_monte_carlo_oracle_drifting_pair(self):
        # independent oracle: direct binomial simulation of the two-epoch update
        rng = np.random.default_rng(123)
        reps = 1_000_000
        s1 = rng.binomial(8, 0.2, size=reps)
        s2 = rng.binomial(8, 0.8, size=reps)
        alpha = 0.25 * 1.0 + 0.5 * s1 + s2
        estimates = alpha / 12.5
        stats = dbb_closed_form(TrueProbSequence(probs=(0.2, 0.8)), 0.5, 8)
        se_mean = estimates.std() / math.sqrt(reps)
        assert abs(estimates.mean() - stats.expectation) < 4 * se_mean
        assert estimates.var() == pytest.approx(stats.variance, rel=0.01)
        sq_err = (estimates - 0.8) ** 2
        se_mse = sq_err.std(ddof=1) / math.sqrt(reps)
        assert abs(sq_err.mean() - stats.mse) < 4 * se_mse

    @given(prob_sequences, st.floats(min_value=1e-6, max_value=1.0), st.integers(1, 16))
    @settings(max_examples=150)
    def test_mse_decomposition_and_bounds(self, seq, lam, n):
        stats = dbb_closed_form(seq, lam, n)
        assert stats.mse == pytest.approx(stats.bias**2 + stats.variance, abs=1e-12)
        assert sum(stats.weights) == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= stats.expectation <= 1.0 + 1e-12
        peak = max(p * (1.0 - p) for p in seq.probs)
        assert stats.variance <= peak / n + 1e-15

    def test_lambda_to_zero_recovers_point_statistics(self):
        seq = TrueProbSequence(probs=(0.1, 0.9, 0.4, 0.7))
        stats = dbb_closed_form(seq, 1e-9, 8)
        assert stats.expectation == pytest.approx(0.7, abs=1e-6)
        assert stats.variance == pytest.approx(point_mse(0.7, 8), rel=1e-6)

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=10),
        st.floats(min_value=0.01, max_value=1.0),
        st.integers(1, 32),
    )
    @settings(max_examples=100)
    def test_expectation_matches_one_step_recursion(self, probs, lam, n):
        # chain the one-step conditional mean through exact pseudo-count expectations
        alpha, beta = 1.0, 1.0
        mean = 0.5
        for p in probs:
            mean = one_step_mean(PosteriorState(alpha=alpha, beta=beta), lam, n, p)
            alpha = lam * alpha + n * p
            beta = lam * beta + n * (1.0 - p)
        stats = dbb_closed_form(TrueProbSequence(probs=tuple(probs)), lam, n)
        assert stats.expectation == pytest.approx(mean, abs=1e-10)

    def test_large_tau_underflow_is_graceful(self):
        seq = TrueProbSequence(probs=(0.5,) * 2000)
        stats = dbb_closed_form(seq, 0.5, 8)
        assert math.isfinite(stats.mse)
        assert stats.weights[0] == 0.0  # prior weight underflowed to zero, not NaN


class TestPointMse:
    def test_worked_values(self):
        assert point_mse(0.5, 8) == 0.03125
        assert point_mse(0.0, 8) == 0.0
        assert point_mse(0.1, 8) == pytest.approx(0.01125, abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            point_mse(1.5, 8)
        with pytest.raises(ValueError):
            point_mse(-0.1, 8)


def test_sequence_validation():
    with pytest.raises(ValueError, match="empty"):
        TrueProbSequence(probs=())
    with pytest.raises(ValueError):
        TrueProbSequence(probs=(1.2,))
    with pytest.raises(ValueError):
        TrueProbSequence(probs=(0.5,), prior_mass=0.0)
