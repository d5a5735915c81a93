"""Point and discounted Beta-Bernoulli estimates of a binary reward distribution.

A rollout group of N binary rewards with S successes supports two estimators
of the underlying success probability:

* point: mean S/N with sample variance N*mean*(1-mean)/(N-1), which collapses
  to zero whenever all rewards in the group are identical;
* discounted Beta-Bernoulli (DBB): pseudo-counts (alpha, beta) are decayed by
  a factor lam in (0, 1] before absorbing each group,

      alpha' = lam*alpha + S,    beta' = lam*beta + (N - S),

  and the reward distribution is estimated by the plug-in mean
  alpha/(alpha+beta) and variance alpha*beta/(alpha+beta)^2. Both pseudo-counts
  stay strictly positive, so the DBB variance can never collapse.

lam = 1 recovers the plain conjugate update; lam -> 0 forgets history and
recovers the point estimate. The one-step shrinkage weight
w = lam*(alpha+beta) / (lam*(alpha+beta) + N) gives the conditional mean
w*mu_prev + (1-w)*p and conditional variance (1-w)^2 * p*(1-p)/N of the DBB
estimate after one more group drawn at true probability p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class EstimatorKind(Enum):
    POINT = "point"
    DBB = "dbb"


@dataclass(frozen=True)
class PosteriorState:
    """Beta pseudo-counts for one prompt, plus the number of updates applied."""

    alpha: float = 1.0
    beta: float = 1.0
    visits: int = 0

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValueError("posterior pseudo-counts must be positive")
        if self.visits < 0:
            raise ValueError("visits must be non-negative")

    @property
    def mass(self) -> float:
        return self.alpha + self.beta

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class RewardGroup:
    """Ordered binary rewards from one rollout group."""

    rewards: tuple[int, ...]

    def __post_init__(self) -> None:
        rewards = tuple(int(r) for r in self.rewards)
        if len(rewards) == 0:
            raise ValueError("empty reward group")
        if any(r not in (0, 1) for r in rewards):
            raise ValueError("rewards must be 0 or 1")
        object.__setattr__(self, "rewards", rewards)

    def __len__(self) -> int:
        return len(self.rewards)

    @property
    def n(self) -> int:
        return len(self.rewards)

    def successes(self) -> int:
        return sum(self.rewards)


@dataclass(frozen=True)
class EstimatorSummary:
    """Estimated mean and variance of the reward distribution.

    ``degenerate`` marks the N=1 point estimate, whose sample variance is
    undefined and reported as 0 so that downstream collapse handling stays on
    a single code path.
    """

    mean: float
    variance: float
    kind: EstimatorKind
    degenerate: bool = False

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def point_estimate(group: RewardGroup) -> EstimatorSummary:
    """Empirical mean and sample variance (N-1 denominator) of a group."""
    n = group.n
    mean = group.successes() / n
    if n == 1:
        return EstimatorSummary(mean=mean, variance=0.0, kind=EstimatorKind.POINT, degenerate=True)
    variance = n * mean * (1.0 - mean) / (n - 1)
    return EstimatorSummary(mean=mean, variance=variance, kind=EstimatorKind.POINT)


def update_beta_bernoulli(state: PosteriorState, group: RewardGroup) -> PosteriorState:
    """Conjugate Beta update: add successes to alpha, failures to beta."""
    s = group.successes()
    return PosteriorState(
        alpha=state.alpha + s,
        beta=state.beta + (group.n - s),
        visits=state.visits + 1,
    )


def _check_lambda(lam: float) -> None:
    if not (0.0 < lam <= 1.0):
        raise ValueError("discount factor out of range")


def update_dbb(state: PosteriorState, group: RewardGroup, lam: float) -> PosteriorState:
    """Discounted update: decay both pseudo-counts by lam, then absorb the group.

    With lam = 1 the result is bit-identical to ``update_beta_bernoulli``
    (multiplying by 1.0 is exact in IEEE arithmetic).
    """
    _check_lambda(lam)
    s = group.successes()
    return PosteriorState(
        alpha=lam * state.alpha + s,
        beta=lam * state.beta + (group.n - s),
        visits=state.visits + 1,
    )


def dbb_estimate(state: PosteriorState) -> EstimatorSummary:
    """Plug-in mean alpha/(alpha+beta) and variance alpha*beta/(alpha+beta)^2."""
    mass = state.alpha + state.beta
    mean = state.alpha / mass
    variance = state.alpha * state.beta / (mass * mass)
    return EstimatorSummary(mean=mean, variance=variance, kind=EstimatorKind.DBB)


def shrinkage_weight(state: PosteriorState, lam: float, n: int) -> float:
    """Fraction of the one-step posterior mean contributed by history."""
    _check_lambda(lam)
    if n < 1:
        raise ValueError("empty group size")
    discounted_mass = lam * (state.alpha + state.beta)
    return discounted_mass / (discounted_mass + n)


def one_step_mean(state: PosteriorState, lam: float, n: int, p_true: float) -> float:
    """Conditional mean of the DBB estimate after one group at probability p_true."""
    _check_probability(p_true)
    w = shrinkage_weight(state, lam, n)
    return w * state.mean + (1.0 - w) * p_true


def one_step_variance(state: PosteriorState, lam: float, n: int, p_true: float) -> float:
    """Conditional variance of the DBB estimate after one group at probability p_true.

    Always <= p_true*(1-p_true)/n, with equality only in the lam -> 0 limit.
    """
    _check_probability(p_true)
    w = shrinkage_weight(state, lam, n)
    return (1.0 - w) ** 2 * p_true * (1.0 - p_true) / n


def _check_probability(p: float) -> None:
    if not (0.0 <= p <= 1.0):
        raise ValueError("probability out of [0, 1]")
