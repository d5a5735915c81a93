"""Exact moments of the DBB estimator along a known probability sequence.

Given true reward probabilities p_1..p_tau, group size N, and discount lam,
the pseudo-count total after tau updates is deterministic:

    H_tau = lam^tau * (alpha0 + beta0) + N * sum_k lam^(tau-k),

and the estimate alpha_tau/H_tau is a convex combination of the prior mean
and the historical probabilities with exponential weights

    c_0 = lam^tau * (alpha0 + beta0) / H_tau,    c_k = N * lam^(tau-k) / H_tau.

Expectation, variance, bias, and MSE all follow in closed form:

    E        = sum_{k=0..tau} c_k p_k
    Var      = sum_{k=1..tau} lam^(2(tau-k)) * N * p_k (1-p_k) / H_tau^2
    Bias     = sum_{k=0..tau-1} c_k (p_k - p_tau)
    MSE      = Bias^2 + Var

The point estimator's MSE is p_tau (1-p_tau) / N for comparison.

H_tau and the lam powers are accumulated by forward recurrence rather than
explicit exponentiation, so lam^tau underflows gracefully to zero
contributions for large tau.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TrueProbSequence:
    """True reward probabilities p_1..p_tau plus the prior's mean and mass."""

    probs: tuple[float, ...]
    prior_mean: float = 0.5
    prior_mass: float = 2.0

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        if len(probs) == 0:
            raise ValueError("empty probability sequence")
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if not (0.0 <= self.prior_mean <= 1.0):
            raise ValueError("prior_mean must lie in [0, 1]")
        if not self.prior_mass > 0.0:
            raise ValueError("prior_mass must be positive")
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class ClosedFormStats:
    expectation: float
    variance: float
    bias: float
    mse: float
    weights: tuple[float, ...]
    total_mass: float


def _check_args(tau: int, lam: float, n: int) -> None:
    if tau < 1:
        raise ValueError("tau must be at least 1")
    if n < 1:
        raise ValueError("group size must be at least 1")
    if not (0.0 < lam <= 1.0):
        raise ValueError("discount factor out of range")


def total_mass(tau: int, lam: float, n: int, prior_mass: float = 2.0) -> float:
    """Deterministic pseudo-count total H_tau, by forward recurrence."""
    _check_args(tau, lam, n)
    if not prior_mass > 0.0:
        raise ValueError("prior_mass must be positive")
    h = prior_mass
    for _ in range(tau):
        h = lam * h + n
    return h


def weights(tau: int, lam: float, n: int, prior_mass: float = 2.0) -> list[float]:
    """Convex weights c_0..c_tau over prior mean and historical probabilities."""
    h = total_mass(tau, lam, n, prior_mass)
    out = [0.0] * (tau + 1)
    power = 1.0
    for k in range(tau, 0, -1):
        out[k] = n * power / h
        power *= lam
    out[0] = prior_mass * power / h
    return out


def dbb_closed_form(seq: TrueProbSequence, lam: float, n: int) -> ClosedFormStats:
    """Expectation, variance, bias, and MSE of the DBB estimate at epoch tau."""
    tau = len(seq)
    c = weights(tau, lam, n, seq.prior_mass)
    h = total_mass(tau, lam, n, seq.prior_mass)

    p = (seq.prior_mean,) + seq.probs
    expectation = sum(ck * pk for ck, pk in zip(c, p))
    p_final = seq.probs[-1]
    bias = sum(c[k] * (p[k] - p_final) for k in range(tau))

    var_num = 0.0
    power2 = 1.0  # lam^(2(tau-k)), accumulated from k=tau downward
    for k in range(tau, 0, -1):
        var_num += power2 * n * p[k] * (1.0 - p[k])
        power2 *= lam * lam
    variance = var_num / (h * h)

    return ClosedFormStats(
        expectation=expectation,
        variance=variance,
        bias=bias,
        mse=bias * bias + variance,
        weights=tuple(c),
        total_mass=h,
    )


def point_mse(p: float, n: int) -> float:
    """MSE of the point estimator: p(1-p)/N, independent of history."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("probability out of [0, 1]")
    if n < 1:
        raise ValueError("group size must be at least 1")
    return p * (1.0 - p) / n
