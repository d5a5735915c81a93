"""Toy RLVR loop: softmax bandit policies trained with clipped surrogate updates.

Each prompt is a K-armed bandit with exactly one rewarded answer, and each
episode is a single action, so the per-token average of the surrogate
objective reduces to one term per rollout. That is the smallest environment
that still exercises group rollouts, posterior updates, advantage schemes,
importance weighting, and clipping.

The loop follows the epoch / minibatch / update structure: per epoch the
prompts are partitioned into minibatches by a seeded permutation; per
minibatch each prompt is rolled out N times under the frozen old policy, its
posterior absorbs the group (with discounting applied per visit, before
advantages are computed), and then ``updates_per_batch`` gradient-ascent
steps are taken on

    (1/N) * sum_i min(w_i * A_i, clip(w_i, 1-clip_low, 1+clip_high) * A_i),

with w_i the probability ratio of the sampled answer under the current vs the
old policy. Prompts have disjoint parameters, so per-prompt updates equal a
joint minibatch update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dbb.advantage import (
    GRPO_DBB,
    AdvantageScheme,
    AdvantageVector,
    compute_advantages,
)
from dbb.estimators import EstimatorKind, PosteriorState, RewardGroup, update_dbb
from dbb.rng import Stream

DEFAULT_CLIP = {
    EstimatorKind.POINT: (0.2, 0.28),
    EstimatorKind.DBB: (0.98, 0.98),
}


@dataclass(frozen=True)
class BanditTask:
    """One synthetic prompt: K candidate answers, exactly one of them correct."""

    prompt_id: str
    k_answers: int
    correct_answer: int

    def __post_init__(self) -> None:
        if self.k_answers < 2:
            raise ValueError("k_answers must be at least 2")
        if not (0 <= self.correct_answer < self.k_answers):
            raise ValueError("correct_answer out of range")


@dataclass(frozen=True, eq=False)
class SoftmaxPolicy:
    logits: np.ndarray

    def probs(self) -> np.ndarray:
        shifted = self.logits - self.logits.max()
        exp = np.exp(shifted)
        return exp / exp.sum()

    def entropy(self) -> float:
        p = self.probs()
        nz = p[p > 0.0]
        return float(-(nz * np.log(nz)).sum())


@dataclass(frozen=True)
class TrainerConfig:
    n_rollouts: int = 8
    epochs: int = 4
    minibatch_size: int = 10
    updates_per_batch: int = 1
    learning_rate: float = 20.0
    lam: float = 0.5
    scheme: AdvantageScheme = GRPO_DBB
    clip_low: float | None = None
    clip_high: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_rollouts < 1:
            raise ValueError("n_rollouts must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.minibatch_size < 1:
            raise ValueError("minibatch_size must be at least 1")
        if self.updates_per_batch < 1:
            raise ValueError("updates_per_batch must be at least 1")
        if not self.learning_rate > 0.0:
            raise ValueError("learning_rate must be positive")
        if not (0.0 < self.lam <= 1.0):
            raise ValueError("discount factor out of range")
        for bound in (self.clip_low, self.clip_high):
            if bound is not None and bound < 0.0:
                raise ValueError("clip bounds must be non-negative")

    def resolved_clip(self) -> tuple[float, float]:
        low, high = DEFAULT_CLIP[self.scheme.estimator]
        return (
            low if self.clip_low is None else self.clip_low,
            high if self.clip_high is None else self.clip_high,
        )


@dataclass(frozen=True)
class StepRecord:
    step: int
    mean_reward: float
    entropy: float
    zero_var_frac: float
    clip_frac: float


@dataclass
class TrainMetrics:
    records: list[StepRecord] = field(default_factory=list)
    posteriors: dict[str, PosteriorState] = field(default_factory=dict)
    lam: float = 1.0


def make_tasks(n_prompts: int, k_answers: int, seed: int) -> list[BanditTask]:
    """Synthetic prompt set with seeded correct answers."""
    if n_prompts < 1:
        raise ValueError("n_prompts must be at least 1")
    stream = Stream.from_seed(seed, "tasks")
    return [
        BanditTask(
            prompt_id=f"p{i:04d}",
            k_answers=k_answers,
            correct_answer=stream.randint_below(k_answers),
        )
        for i in range(n_prompts)
    ]


def rollout_group(
    policy: SoftmaxPolicy, task: BanditTask, n: int, stream: Stream
) -> tuple[RewardGroup, tuple[int, ...]]:
    """Sample n answers i.i.d. from the policy; reward 1 iff the answer is correct."""
    if n < 1:
        raise ValueError("n must be at least 1")
    cumulative = np.cumsum(policy.probs())
    draws = np.searchsorted(cumulative, stream.uniforms(n), side="right")
    draws = np.minimum(draws, task.k_answers - 1)
    answers = tuple(int(a) for a in draws)
    rewards = RewardGroup(tuple(1 if a == task.correct_answer else 0 for a in answers))
    return rewards, answers


def surrogate_objective(
    logits: np.ndarray,
    answers: tuple[int, ...],
    advantages: AdvantageVector,
    old_probs: np.ndarray,
    clip_low: float,
    clip_high: float,
) -> float:
    """Clipped surrogate value; the quantity whose gradient drives the update."""
    policy = SoftmaxPolicy(logits)
    w = policy.probs()[list(answers)] / old_probs
    adv = np.asarray(advantages.values, dtype=np.float64)
    clipped = np.clip(w, 1.0 - clip_low, 1.0 + clip_high)
    return float(np.minimum(w * adv, clipped * adv).mean())


def surrogate_gradient(
    logits: np.ndarray,
    answers: tuple[int, ...],
    advantages: AdvantageVector,
    old_probs: np.ndarray,
    clip_low: float,
    clip_high: float,
) -> tuple[np.ndarray, float]:
    """Analytic gradient of the surrogate w.r.t. the logits, plus clipped fraction.

    A rollout contributes through w only when the min selects the unclipped
    branch (ties included: inside the clip range both branches coincide);
    otherwise the clip is saturated and the contribution is constant.
    """
    p = SoftmaxPolicy(logits).probs()
    idx = np.asarray(answers, dtype=np.int64)
    adv = np.asarray(advantages.values, dtype=np.float64)
    w = p[idx] / old_probs
    clipped = np.clip(w, 1.0 - clip_low, 1.0 + clip_high)
    unclipped_active = w * adv <= clipped * adv
    coef = np.where(unclipped_active, adv, 0.0) * w
    grad = np.zeros_like(logits)
    np.add.at(grad, idx, coef)
    grad -= coef.sum() * p
    grad /= idx.size
    return grad, float(np.mean(~unclipped_active))


def surrogate_update(
    policy: SoftmaxPolicy,
    answers: tuple[int, ...],
    advantages: AdvantageVector,
    old_probs: np.ndarray,
    config: TrainerConfig,
) -> SoftmaxPolicy:
    """One gradient-ascent step on the clipped surrogate.

    A fully collapsed advantage vector returns the policy unchanged,
    bit-exactly.
    """
    if len(answers) != len(advantages.values) or len(answers) != len(old_probs):
        raise ValueError("answers, advantages, and old_probs must align")
    if all(v == 0.0 for v in advantages.values):
        return policy
    clip_low, clip_high = config.resolved_clip()
    grad, _ = surrogate_gradient(policy.logits, answers, advantages, old_probs, clip_low, clip_high)
    new_logits = policy.logits + config.learning_rate * grad
    if not np.all(np.isfinite(new_logits)):
        raise ValueError("non-finite gradient")
    return SoftmaxPolicy(new_logits)


def _permutation(count: int, stream: Stream) -> list[int]:
    order = list(range(count))
    for i in range(count - 1, 0, -1):
        j = stream.randint_below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def train(
    tasks: list[BanditTask],
    config: TrainerConfig,
    initial_posteriors: dict[str, PosteriorState] | None = None,
) -> TrainMetrics:
    """Full training run; deterministic given (tasks, config)."""
    if not tasks:
        raise ValueError("empty task list")
    ids = [t.prompt_id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate prompt ids")

    posteriors = {t.prompt_id: PosteriorState() for t in tasks}
    if initial_posteriors:
        posteriors.update({k: v for k, v in initial_posteriors.items() if k in posteriors})
    policies = {t.prompt_id: SoftmaxPolicy(np.zeros(t.k_answers)) for t in tasks}
    need_posterior = config.scheme.estimator is EstimatorKind.DBB
    clip_low, clip_high = config.resolved_clip()

    metrics = TrainMetrics(lam=config.lam)
    step = 0
    for epoch in range(1, config.epochs + 1):
        shuffle = Stream.from_seed(config.seed, "shuffle", epoch)
        order = _permutation(len(tasks), shuffle)
        for start in range(0, len(order), config.minibatch_size):
            batch = order[start : start + config.minibatch_size]
            step += 1

            rollouts = []
            total_successes = 0
            zero_var_groups = 0
            for task_index in batch:
                task = tasks[task_index]
                stream = Stream.from_seed(config.seed, "rollout", epoch, task_index)
                policy = policies[task.prompt_id]
                group, answers = rollout_group(policy, task, config.n_rollouts, stream)
                posterior = update_dbb(posteriors[task.prompt_id], group, config.lam)
                posteriors[task.prompt_id] = posterior
                adv = compute_advantages(
                    group, config.scheme, posterior=posterior if need_posterior else None
                )
                old_probs = policy.probs()[list(answers)]
                rollouts.append((task.prompt_id, answers, adv, old_probs))
                total_successes += group.successes()
                s = group.successes()
                zero_var_groups += int(s == 0 or s == group.n or group.n == 1)

            clip_fractions = []
            for _ in range(config.updates_per_batch):
                clipped_total = 0.0
                for prompt_id, answers, adv, old_probs in rollouts:
                    policy = policies[prompt_id]
                    if all(v == 0.0 for v in adv.values):
                        clip_fractions_part = 0.0
                    else:
                        grad, clip_frac = surrogate_gradient(
                            policy.logits, answers, adv, old_probs, clip_low, clip_high
                        )
                        new_logits = policy.logits + config.learning_rate * grad
                        if not np.all(np.isfinite(new_logits)):
                            raise ValueError("non-finite gradient")
                        policies[prompt_id] = SoftmaxPolicy(new_logits)
                        clip_fractions_part = clip_frac
                    clipped_total += clip_fractions_part
                clip_fractions.append(clipped_total / len(rollouts))

            entropy = sum(policies[tasks[i].prompt_id].entropy() for i in batch) / len(batch)
            metrics.records.append(
                StepRecord(
                    step=step,
                    mean_reward=total_successes / (len(batch) * config.n_rollouts),
                    entropy=entropy,
                    zero_var_frac=zero_var_groups / len(batch),
                    clip_frac=sum(clip_fractions) / len(clip_fractions),
                )
            )

    metrics.posteriors = dict(posteriors)
    return metrics
