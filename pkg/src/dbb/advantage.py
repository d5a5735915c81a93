"""Per-rollout advantages from a reward group.

Four schemes, the cross product of a normalization and an estimator:

* group-relative + point: (X_i - mean)/std with the group sample statistics.
  When every reward is identical the std is zero and the group carries no
  within-group signal; the collapse policy decides whether that yields an
  all-zero advantage vector or an error.
* group-relative + DBB: (X_i - mean)/std with the plug-in posterior
  statistics, which never collapse.
* mean-centered (+ either estimator): X_i - mean, no std division.

DBB schemes read the posterior *after* it has absorbed the current group;
callers update first, then compute advantages.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from dbb.estimators import EstimatorKind, PosteriorState, RewardGroup, dbb_estimate, point_estimate


class Normalization(Enum):
    GROUP_RELATIVE = "group-relative"
    MEAN_CENTERED = "mean-centered"


class CollapsePolicy(Enum):
    ZERO_ADVANTAGE = "zero-advantage"
    ERROR = "error"


@dataclass(frozen=True)
class AdvantageScheme:
    normalization: Normalization
    estimator: EstimatorKind
    collapse_policy: CollapsePolicy = CollapsePolicy.ZERO_ADVANTAGE


GRPO_POINT = AdvantageScheme(Normalization.GROUP_RELATIVE, EstimatorKind.POINT)
GRPO_DBB = AdvantageScheme(Normalization.GROUP_RELATIVE, EstimatorKind.DBB)
DRGRPO_POINT = AdvantageScheme(Normalization.MEAN_CENTERED, EstimatorKind.POINT)
DRGRPO_DBB = AdvantageScheme(Normalization.MEAN_CENTERED, EstimatorKind.DBB)

SCHEMES = {
    "grpo-point": GRPO_POINT,
    "grpo-dbb": GRPO_DBB,
    "drgrpo-point": DRGRPO_POINT,
    "drgrpo-dbb": DRGRPO_DBB,
}


def scheme_from_name(name: str) -> AdvantageScheme:
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown advantage scheme {name!r}") from None


def scheme_name(scheme: AdvantageScheme) -> str:
    for name, known in SCHEMES.items():
        if known.normalization == scheme.normalization and known.estimator == scheme.estimator:
            return name
    raise ValueError("unnamed advantage scheme")


@dataclass(frozen=True)
class AdvantageVector:
    """One advantage per rollout; ``collapsed`` marks a zeroed-out group."""

    values: tuple[float, ...]
    collapsed: bool = False


def compute_advantages(
    group: RewardGroup,
    scheme: AdvantageScheme,
    posterior: PosteriorState | None = None,
) -> AdvantageVector:
    """Advantages for every rollout in ``group`` under ``scheme``.

    For DBB schemes ``posterior`` is required and must already include the
    current group's update.
    """
    if scheme.estimator is EstimatorKind.DBB:
        if posterior is None:
            raise ValueError("DBB scheme requires a posterior state")
        summary = dbb_estimate(posterior)
    else:
        summary = point_estimate(group)

    if scheme.normalization is Normalization.MEAN_CENTERED:
        values = tuple(r - summary.mean for r in group.rewards)
        return AdvantageVector(values=values)

    std = math.sqrt(summary.variance)
    if std == 0.0:
        # Only reachable for the point estimator; DBB variance is strictly positive.
        if scheme.collapse_policy is CollapsePolicy.ERROR:
            raise ValueError("variance collapse")
        return AdvantageVector(values=(0.0,) * group.n, collapsed=True)
    values = tuple((r - summary.mean) / std for r in group.rewards)
    return AdvantageVector(values=values)
