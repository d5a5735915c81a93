"""Discounted Beta-Bernoulli reward estimation for group-based RL.

Estimators and advantage schemes, exact error analysis along known
probability trajectories, a Monte Carlo sweep engine that validates the
closed forms, and a toy policy-gradient trainer exercising the full loop.
"""
from dbb.advantage import (
    DRGRPO_DBB,
    DRGRPO_POINT,
    GRPO_DBB,
    GRPO_POINT,
    AdvantageScheme,
    AdvantageVector,
    CollapsePolicy,
    Normalization,
    compute_advantages,
    scheme_from_name,
)
from dbb.closed_form import (
    ClosedFormStats,
    TrueProbSequence,
    dbb_closed_form,
    point_mse,
    total_mass,
    weights,
)
from dbb.drift import (
    BoundedRandomWalk,
    DriftModel,
    LinearRamp,
    Logistic,
    ReferenceEstimate,
    Stationary,
    Step,
    generate_trajectory,
    reference_estimate,
)
from dbb.estimators import (
    EstimatorKind,
    EstimatorSummary,
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
from dbb.simulator import SweepRecord, SweepSpec, argmin_lambda, run_sweep
from dbb.trainer import (
    BanditTask,
    SoftmaxPolicy,
    TrainerConfig,
    TrainMetrics,
    make_tasks,
    rollout_group,
    surrogate_objective,
    surrogate_update,
    train,
)

__all__ = [
    "AdvantageScheme",
    "AdvantageVector",
    "BanditTask",
    "BoundedRandomWalk",
    "ClosedFormStats",
    "CollapsePolicy",
    "DriftModel",
    "DRGRPO_DBB",
    "DRGRPO_POINT",
    "EstimatorKind",
    "EstimatorSummary",
    "GRPO_DBB",
    "GRPO_POINT",
    "LinearRamp",
    "Logistic",
    "Normalization",
    "PosteriorState",
    "ReferenceEstimate",
    "RewardGroup",
    "SoftmaxPolicy",
    "Stationary",
    "Step",
    "SweepRecord",
    "SweepSpec",
    "TrainMetrics",
    "TrainerConfig",
    "TrueProbSequence",
    "argmin_lambda",
    "compute_advantages",
    "dbb_closed_form",
    "dbb_estimate",
    "generate_trajectory",
    "make_tasks",
    "one_step_mean",
    "one_step_variance",
    "point_estimate",
    "point_mse",
    "reference_estimate",
    "rollout_group",
    "run_sweep",
    "scheme_from_name",
    "shrinkage_weight",
    "surrogate_objective",
    "surrogate_update",
    "total_mass",
    "train",
    "update_beta_bernoulli",
    "update_dbb",
    "weights",
]

__version__ = "0.1.0"
