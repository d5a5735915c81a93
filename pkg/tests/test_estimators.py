"""Estimator arithmetic against hand-derived and simulated oracles."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbb.estimators import (
    EstimatorKind,
    PosteriorState,
    RewardGroup,
    dbb_estimate,
    one_step_mean,
    one_step_variance,
    point_estimate,
    shrinkage_weight,
    update_beta_bernoulli,
    update_dbb,
)

reward_groups = st.lists(st.integers(0, 1), min_size=1, max_size=16).map(
    lambda r: RewardGroup(tuple(r))
)


class TestPointEstimate:
    def test_half_successes(self):
        summary = point_estimate(RewardGroup((1, 0, 1, 0, 1, 0, 1, 0)))
        assert summary.mean == 0.5
        assert math.isclose(summary.variance, 2.0 / 7.0, rel_tol=0, abs_tol=1e-15)
        assert summary.kind is EstimatorKind.POINT

    def test_all_successes_collapse(self):
        summary = point_estimate(RewardGroup((1,) * 8))
        assert summary.mean == 1.0
        assert summary.variance == 0.0

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError, match="empty reward group"):
            RewardGroup(())

    def test_single_rollout_degenerate(self):
        summary = point_estimate(RewardGroup((1,)))
        assert summary.variance == 0.0
        assert summary.degenerate

    @given(reward_groups)
    @settings(max_examples=100)
    def test_matches_numpy_sample_variance(self, group):
        summary = point_estimate(group)
        rewards = np.array(group.rewards, dtype=np.float64)
        assert summary.mean == pytest.approx(rewards.mean(), abs=1e-12)
        if group.n >= 2:
            assert summary.variance == pytest.approx(rewards.var(ddof=1), abs=1e-12)


class TestUpdates:
    def test_conjugate_update(self):
        state = update_beta_bernoulli(PosteriorState(), RewardGroup((1, 1, 1, 1, 0, 0, 0, 0)))
        assert (state.alpha, state.beta, state.visits) == (5.0, 5.0, 1)

    def test_all_failures(self):
        state = update_beta_bernoulli(PosteriorState(), RewardGroup((0,) * 8))
        assert (state.alpha, state.beta) == (1.0, 9.0)

    def test_all_successes_chained(self):
        state = update_beta_bernoulli(PosteriorState(alpha=5, beta=5, visits=1), RewardGroup((1,) * 8))
        assert (state.alpha, state.beta, state.visits) == (13.0, 5.0, 2)

    def test_discounted_update(self):
        state = update_dbb(PosteriorState(), RewardGroup((1,) * 8), 0.5)
        assert (state.alpha, state.beta) == (8.5, 0.5)

    def test_discounted_update_lambda_one(self):
        state = update_dbb(PosteriorState(), RewardGroup((1, 1, 1, 1, 0, 0, 0, 0)), 1.0)
        assert (state.alpha, state.beta) == (5.0, 5.0)

    def test_discounted_update_chained(self):
        state = PosteriorState(alpha=8.5, beta=0.5, visits=1)
        state = update_dbb(state, RewardGroup((1,) * 6 + (0,) * 2), 0.5)
        assert (state.alpha, state.beta, state.visits) == (10.25, 2.25, 2)

    @pytest.mark.parametrize("lam", [0.0, -0.5, 1.5])
    def test_discount_out_of_range(self, lam):
        with pytest.raises(ValueError, match="discount factor out of range"):
            update_dbb(PosteriorState(), RewardGroup((1, 0)), lam)

    @given(st.lists(reward_groups, min_size=1, max_size=50))
    @settings(max_examples=60)
    def test_lambda_one_reduces_to_conjugate(self, groups):
        dbb = conj = PosteriorState()
        for group in groups:
            dbb = update_dbb(dbb, group, 1.0)
            conj = update_beta_bernoulli(conj, group)
            assert dbb == conj  # bit-exact, no tolerance

    def test_lambda_to_zero_recovers_point_mean(self):
        n = 8
        for s in range(n + 1):
            group = RewardGroup((1,) * s + (0,) * (n - s))
            state = update_dbb(PosteriorState(), group, 1e-6)
            assert abs(dbb_estimate(state).mean - point_estimate(group).mean) < 1e-5

    def test_mass_matches_direct_formula(self):
        # recurrence result vs explicit lam^tau expression, random histories
        rng = np.random.default_rng(1)
        for _ in range(50):
            lam = rng.uniform(0.05, 1.0)
            n = int(rng.integers(1, 17))
            tau = int(rng.integers(1, 60))
            state = PosteriorState()
            for _ in range(tau):
                rewards = tuple(int(x) for x in rng.integers(0, 2, n))
                state = update_dbb(state, RewardGroup(rewards), lam)
            direct = lam**tau * 2.0 + n * sum(lam ** (tau - k) for k in range(1, tau + 1))
            assert state.mass == pytest.approx(direct, rel=1e-12)
            assert state.visits == tau


class TestDbbEstimate:
    def test_uniform_prior(self):
        summary = dbb_estimate(PosteriorState())
        assert summary.mean == 0.5
        assert summary.variance == 0.25
        assert summary.kind is EstimatorKind.DBB

    def test_heavy_success_state(self):
        # oracle: exact fractions 17/18 and 17/324
        summary = dbb_estimate(PosteriorState(alpha=8.5, beta=0.5, visits=1))
        assert summary.mean == pytest.approx(float(Fraction(17, 18)), abs=1e-15)
        assert summary.variance == pytest.approx(float(Fraction(17, 324)), abs=1e-15)

    @given(st.floats(min_value=1e-6, max_value=1e6))
    @settings(max_examples=100)
    def test_symmetric_state_mean_half(self, mass):
        assert dbb_estimate(PosteriorState(alpha=mass, beta=mass)).mean == 0.5

    @given(
        st.lists(reward_groups, min_size=1, max_size=100),
        st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9, 1.0]),
    )
    @settings(max_examples=60, deadline=None)
    def test_variance_never_collapses(self, groups, lam):
        state = PosteriorState()
        for group in groups:
            state = update_dbb(state, group, lam)
            assert dbb_estimate(state).variance > 0.0
            assert state.alpha >= lam ** state.visits
            assert state.beta >= lam ** state.visits


class TestShrinkage:
    def test_prior_weight(self):
        assert shrinkage_weight(PosteriorState(), 0.5, 8) == pytest.approx(1.0 / 9.0, abs=1e-15)

    def test_vanishing_discount(self):
        assert shrinkage_weight(PosteriorState(), 1e-12, 8) < 1e-12

    def test_zero_group_size(self):
        with pytest.raises(ValueError, match="empty group size"):
            shrinkage_weight(PosteriorState(), 0.5, 0)

    def test_one_step_variance_value(self):
        # (8/9)^2 * 0.25 / 8 = 2/81
        value = one_step_variance(PosteriorState(), 0.5, 8, 0.5)
        assert value == pytest.approx(2.0 / 81.0, abs=1e-15)

    def test_one_step_variance_monte_carlo(self):
        # resample 1e5 groups from the (1,1) prior state at p=0.5
        rng = np.random.default_rng(42)
        successes = rng.binomial(8, 0.5, size=100_000)
        estimates = (0.5 * 1.0 + successes) / (0.5 * 2.0 + 8.0)
        expected = one_step_variance(PosteriorState(), 0.5, 8, 0.5)
        assert estimates.var() == pytest.approx(expected, rel=0.02)
        assert estimates.mean() == pytest.approx(one_step_mean(PosteriorState(), 0.5, 8, 0.5), abs=1e-3)

    @given(
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=1e-9, max_value=1.0),
        st.integers(min_value=1, max_value=64),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    @settings(max_examples=200)
    def test_one_step_variance_reduction(self, p, lam, n, mass):
        state = PosteriorState(alpha=mass, beta=mass)
        assert one_step_variance(state, lam, n, p) <= p * (1.0 - p) / n + 1e-15


class TestPointSamplingProperties:
    def test_unbiasedness(self):
        n, p, reps = 8, 0.3, 100_000
        rng = np.random.default_rng(7)
        means = rng.binomial(n, p, size=reps) / n
        bound = 4.0 * math.sqrt(p * (1 - p) / (n * reps))
        assert abs(means.mean() - p) < bound

    def test_variance_matches_theory(self):
        n, p, reps = 8, 0.3, 100_000
        rng = np.random.default_rng(8)
        means = rng.binomial(n, p, size=reps) / n
        assert means.var() == pytest.approx(p * (1 - p) / n, rel=0.05)


def test_posterior_state_validation():
    with pytest.raises(ValueError):
        PosteriorState(alpha=0.0)
    with pytest.raises(ValueError):
        PosteriorState(beta=-1.0)
    with pytest.raises(ValueError):
        PosteriorState(visits=-1)


def test_reward_group_validation():
    with pytest.raises(ValueError, match="rewards must be 0 or 1"):
        RewardGroup((0, 2))
    group = RewardGroup((1, 0, 1))
    assert group.successes() == 2
    assert len(group) == group.n == 3
