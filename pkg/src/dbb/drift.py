"""Synthetic non-stationary reward-probability trajectories.

These stand in for the drifting success probability that an evolving policy
induces on each prompt. Every generator is deterministic given (model, seed);
the deterministic kinds ignore the seed entirely. The logistic kind is the
default slow learning-curve stand-in.

``reference_estimate`` implements the large-sample surrogate for the true
probability: the mean of a fixed budget of Bernoulli draws (128 by default).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from dbb.closed_form import TrueProbSequence
from dbb.rng import Stream


def _check_prob(value: float, name: str) -> None:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")


def _check_length(length: int) -> None:
    if length < 1:
        raise ValueError("trajectory length must be at least 1")


@dataclass(frozen=True)
class Stationary:
    p: float
    length: int

    KIND = "stationary"

    def __post_init__(self) -> None:
        _check_prob(self.p, "p")
        _check_length(self.length)


@dataclass(frozen=True)
class LinearRamp:
    p_start: float
    p_end: float
    length: int

    KIND = "linear-ramp"

    def __post_init__(self) -> None:
        _check_prob(self.p_start, "p_start")
        _check_prob(self.p_end, "p_end")
        _check_length(self.length)


@dataclass(frozen=True)
class Logistic:
    """Sigmoid ramp from ``floor`` to ``ceiling`` centered at ``midpoint``."""

    midpoint: float = 5.0
    rate: float = 0.5
    floor: float = 0.1
    ceiling: float = 0.9
    length: int = 10

    KIND = "logistic"

    def __post_init__(self) -> None:
        _check_prob(self.floor, "floor")
        _check_prob(self.ceiling, "ceiling")
        if self.floor > self.ceiling:
            raise ValueError("floor must not exceed ceiling")
        if not math.isfinite(self.rate) or not math.isfinite(self.midpoint):
            raise ValueError("rate and midpoint must be finite")
        _check_length(self.length)


@dataclass(frozen=True)
class Step:
    p_before: float
    p_after: float
    change_epoch: int
    length: int

    KIND = "step"

    def __post_init__(self) -> None:
        _check_prob(self.p_before, "p_before")
        _check_prob(self.p_after, "p_after")
        if self.change_epoch < 1:
            raise ValueError("change_epoch must be at least 1")
        _check_length(self.length)


@dataclass(frozen=True)
class BoundedRandomWalk:
    """Gaussian random walk clamped to [0, 1] after every step."""

    p_start: float
    step_std: float
    length: int

    KIND = "bounded-random-walk"

    def __post_init__(self) -> None:
        _check_prob(self.p_start, "p_start")
        if self.step_std < 0.0:
            raise ValueError("step_std must be non-negative")
        _check_length(self.length)


DriftModel = Union[Stationary, LinearRamp, Logistic, Step, BoundedRandomWalk]

_KINDS = {cls.KIND: cls for cls in (Stationary, LinearRamp, Logistic, Step, BoundedRandomWalk)}


def generate_trajectory(model: DriftModel, seed: int) -> TrueProbSequence:
    """True probabilities p_1..p_tau for ``model``, deterministic given seed."""
    tau = model.length
    if isinstance(model, Stationary):
        probs = [model.p] * tau
    elif isinstance(model, LinearRamp):
        if tau == 1:
            probs = [model.p_start]
        else:
            span = model.p_end - model.p_start
            probs = [model.p_start + span * k / (tau - 1) for k in range(tau)]
    elif isinstance(model, Logistic):
        span = model.ceiling - model.floor
        probs = [
            model.floor + span / (1.0 + math.exp(-model.rate * (k - model.midpoint)))
            for k in range(1, tau + 1)
        ]
    elif isinstance(model, Step):
        probs = [model.p_before if k < model.change_epoch else model.p_after for k in range(1, tau + 1)]
    elif isinstance(model, BoundedRandomWalk):
        stream = Stream.from_seed(seed, "trajectory")
        p = model.p_start
        probs = []
        for _ in range(tau):
            probs.append(p)
            p = min(1.0, max(0.0, p + model.step_std * stream.next_normal()))
    else:
        raise TypeError(f"unknown drift model {type(model).__name__}")
    probs = [min(1.0, max(0.0, p)) for p in probs]
    return TrueProbSequence(probs=tuple(probs))


@dataclass(frozen=True)
class ReferenceEstimate:
    """Empirical success rate from a fixed budget of extra rollouts."""

    value: float
    sample_count: int = 128


def reference_estimate(p_true: float, sample_count: int = 128, seed: int = 0) -> ReferenceEstimate:
    """Mean of ``sample_count`` Bernoulli(p_true) draws, deterministic given seed."""
    _check_prob(p_true, "p_true")
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    stream = Stream.from_seed(seed, "reference")
    successes = int(stream.bernoulli(p_true, sample_count).sum())
    return ReferenceEstimate(value=successes / sample_count, sample_count=sample_count)


def drift_model_to_dict(model: DriftModel) -> dict:
    out = {"kind": model.KIND}
    for name in model.__dataclass_fields__:
        out[name] = getattr(model, name)
    return out


def drift_model_from_dict(data: dict) -> DriftModel:
    if "kind" not in data:
        raise ValueError("drift model requires a 'kind' key")
    kind = data["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown drift kind {kind!r}")
    cls = _KINDS[kind]
    fields = set(cls.__dataclass_fields__)
    given = {k: v for k, v in data.items() if k != "kind"}
    unknown = set(given) - fields
    if unknown:
        raise ValueError(f"unknown drift keys: {sorted(unknown)}")
    try:
        return cls(**given)
    except TypeError as exc:
        raise ValueError(f"invalid drift model: {exc}") from None
