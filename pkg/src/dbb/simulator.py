"""Monte Carlo MSE sweeps over discount factors and group sizes.

For every grid point (lambda, n) the engine simulates independent reward
histories along one fixed probability trajectory, tracks a DBB posterior per
history, and averages squared estimation errors at the requested epochs for
both the DBB and the point estimator. The matching closed-form values are
evaluated once per grid point, which is what makes the sweep a validation of
the closed forms and not just a benchmark.

Determinism contract: replication r draws only from a stream keyed by
(base_seed, n, r), reward draws are shared across the lambda grid (common
random numbers), and reductions run in replication order. Outputs are
therefore byte-identical for any worker count.

Squared error is measured against the trajectory's known probability by
default. ``target="reference"`` instead measures against a 128-draw reference
estimate per epoch, mirroring the measurement protocol that a real training
run would use; the reference sampling noise then adds its own variance on top
of the closed-form MSE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dbb import _kernels
from dbb.closed_form import TrueProbSequence, dbb_closed_form, point_mse
from dbb.drift import DriftModel, generate_trajectory, reference_estimate
from dbb.rng import derive_key, fold_in_array

_TARGETS = ("true", "reference")


@dataclass(frozen=True)
class SweepSpec:
    trajectory: DriftModel
    lambdas: tuple[float, ...]
    group_sizes: tuple[int, ...]
    replications: int
    eval_epochs: tuple[int, ...]
    base_seed: int
    target: str = "true"

    def __post_init__(self) -> None:
        lambdas = tuple(float(l) for l in self.lambdas)
        group_sizes = tuple(int(n) for n in self.group_sizes)
        eval_epochs = tuple(sorted(set(int(e) for e in self.eval_epochs)))
        if not lambdas:
            raise ValueError("empty lambda grid")
        if any(not (0.0 < l <= 1.0) for l in lambdas):
            raise ValueError("discount factor out of range")
        if not group_sizes:
            raise ValueError("empty group size grid")
        if any(n < 1 for n in group_sizes):
            raise ValueError("group sizes must be at least 1")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not eval_epochs:
            raise ValueError("empty eval epochs")
        if eval_epochs[0] < 1 or eval_epochs[-1] > self.trajectory.length:
            raise ValueError("eval epochs outside trajectory")
        if self.target not in _TARGETS:
            raise ValueError(f"target must be one of {_TARGETS}")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "group_sizes", group_sizes)
        object.__setattr__(self, "eval_epochs", eval_epochs)


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    n: int
    epoch: int
    mse_dbb_empirical: float
    mse_dbb_closed: float
    mse_point_empirical: float
    mse_point_closed: float
    stderr_dbb: float
    stderr_point: float


def _stderr(samples: np.ndarray) -> float:
    if samples.size < 2:
        return 0.0
    return float(samples.std(ddof=1) / math.sqrt(samples.size))


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """All SweepRecords for the grid, ordered by (lambda, n, epoch)."""
    seq = generate_trajectory(spec.trajectory, spec.base_seed)
    probs = np.asarray(seq.probs, dtype=np.float64)
    eval_epochs = np.asarray(spec.eval_epochs, dtype=np.int64)
    lambdas = np.asarray(spec.lambdas, dtype=np.float64)

    if spec.target == "true":
        targets = probs[eval_epochs - 1]
    else:
        targets = np.array(
            [
                reference_estimate(
                    float(probs[e - 1]), seed=derive_key(spec.base_seed, "ref-epoch", int(e))
                ).value
                for e in spec.eval_epochs
            ],
            dtype=np.float64,
        )

    by_point: dict[tuple[float, int, int], SweepRecord] = {}
    for n in spec.group_sizes:
        group_key = derive_key(spec.base_seed, "sweep", n)
        keys = fold_in_array(group_key, np.arange(spec.replications, dtype=np.uint64))
        sq_dbb, sq_pt = _kernels.sweep_squared_errors(
            keys, probs, lambdas, n, eval_epochs, 1.0, 1.0, targets, workers=workers
        )
        for li, lam in enumerate(spec.lambdas):
            for ei, epoch in enumerate(spec.eval_epochs):
                closed = dbb_closed_form(TrueProbSequence(probs=seq.probs[:epoch]), lam, n)
                dbb_samples = sq_dbb[:, li, ei]
                pt_samples = sq_pt[:, ei]
                by_point[(lam, n, epoch)] = SweepRecord(
                    lam=lam,
                    n=n,
                    epoch=epoch,
                    mse_dbb_empirical=float(dbb_samples.mean()),
                    mse_dbb_closed=closed.mse,
                    mse_point_empirical=float(pt_samples.mean()),
                    mse_point_closed=point_mse(float(probs[epoch - 1]), n),
                    stderr_dbb=_stderr(dbb_samples),
                    stderr_point=_stderr(pt_samples),
                )

    return [
        by_point[(lam, n, epoch)]
        for lam in spec.lambdas
        for n in spec.group_sizes
        for epoch in spec.eval_epochs
    ]


def argmin_lambda(records: list[SweepRecord], epoch: int) -> tuple[float, float]:
    """Grid lambda with the smallest empirical DBB MSE at ``epoch``.

    Ties break toward the smaller lambda. Requires at least two distinct
    lambdas at the epoch.
    """
    at_epoch = [r for r in records if r.epoch == epoch]
    if not at_epoch:
        raise ValueError(f"no records at epoch {epoch}")
    if len({r.lam for r in at_epoch}) < 2:
        raise ValueError("argmin needs at least two lambdas")
    best = min(at_epoch, key=lambda r: (r.mse_dbb_empirical, r.lam))
    return best.lam, best.mse_dbb_empirical
