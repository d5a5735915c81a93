"""Experiment configuration: one JSON file, strict keys, lossless round-trip.

The file has a global section (seed, output_path, worker_count), a drift
model, and one section per CLI command. Unknown keys anywhere are rejected so
a config file is always a faithful record of what ran. Command-line flags
override file values.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from dbb.advantage import SCHEMES
from dbb.drift import (
    BoundedRandomWalk,
    DriftModel,
    LinearRamp,
    Logistic,
    Stationary,
    Step,
    drift_model_from_dict,
    drift_model_to_dict,
)


class ConfigError(Exception):
    """Invalid or malformed experiment configuration."""


DEFAULT_LAMBDA_GRID = tuple(round(0.1 * k, 10) for k in range(1, 11))


@dataclass(frozen=True)
class LambdaSweepSection:
    lambdas: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    n: int = 8
    replications: int = 100_000
    eval_epochs: tuple[int, ...] = ()  # empty means: final epoch only
    target: str = "true"


@dataclass(frozen=True)
class NSweepSection:
    lam: float = 0.4
    group_sizes: tuple[int, ...] = (2, 4, 8, 16, 32, 64, 128)
    replications: int = 20_000
    eval_epochs: tuple[int, ...] = ()
    target: str = "true"


def default_validation_trajectories(length: int = 10) -> tuple[DriftModel, ...]:
    return (
        Stationary(p=0.5, length=length),
        Step(p_before=0.2, p_after=0.8, change_epoch=length // 2 + 1, length=length),
        LinearRamp(p_start=0.1, p_end=0.9, length=length),
        Logistic(length=length),
        BoundedRandomWalk(p_start=0.5, step_std=0.05, length=length),
    )


@dataclass(frozen=True)
class ValidateSection:
    lambdas: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    n: int = 8
    replications: int = 100_000
    eval_epochs: tuple[int, ...] = ()
    trajectories: tuple[DriftModel, ...] = default_validation_trajectories()


@dataclass(frozen=True)
class TrainSection:
    n_prompts: int = 200
    k_answers: int = 16
    n_rollouts: int = 8
    epochs: int = 4
    minibatch_size: int = 10
    updates_per_batch: int = 1
    learning_rate: float = 20.0
    lam: float = 0.5
    scheme: str = "grpo-dbb"
    clip_low: float | None = None
    clip_high: float | None = None

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    output_path: str | None = None
    worker_count: int = 1
    drift: DriftModel = Logistic()
    sweep_lambda: LambdaSweepSection = LambdaSweepSection()
    sweep_n: NSweepSection = NSweepSection()
    mc_validate: ValidateSection = ValidateSection()
    train: TrainSection = TrainSection()

    def __post_init__(self) -> None:
        if self.worker_count < 1:
            raise ConfigError("worker_count must be at least 1")


def _build_section(cls, data: dict, special: dict | None = None):
    if not isinstance(data, dict):
        raise ConfigError(f"section for {cls.__name__} must be an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown keys in {cls.__name__}: {unknown}")
    kwargs = {}
    for key, value in data.items():
        if special and key in special:
            value = special[key](value)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {cls.__name__}: {exc}") from None


def _parse_drift(value) -> DriftModel:
    if not isinstance(value, dict):
        raise ConfigError("drift must be an object with a 'kind' key")
    try:
        return drift_model_from_dict(value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _parse_trajectories(value) -> tuple[DriftModel, ...]:
    if not isinstance(value, list):
        raise ConfigError("trajectories must be a list of drift objects")
    return tuple(_parse_drift(item) for item in value)


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    kwargs: dict = {}
    if "seed" in data:
        kwargs["seed"] = data["seed"]
    if "output_path" in data:
        kwargs["output_path"] = data["output_path"]
    if "worker_count" in data:
        kwargs["worker_count"] = data["worker_count"]
    if "drift" in data:
        kwargs["drift"] = _parse_drift(data["drift"])
    if "sweep_lambda" in data:
        kwargs["sweep_lambda"] = _build_section(LambdaSweepSection, data["sweep_lambda"])
    if "sweep_n" in data:
        kwargs["sweep_n"] = _build_section(NSweepSection, data["sweep_n"])
    if "mc_validate" in data:
        kwargs["mc_validate"] = _build_section(
            ValidateSection, data["mc_validate"], special={"trajectories": _parse_trajectories}
        )
    if "train" in data:
        kwargs["train"] = _build_section(TrainSection, data["train"])
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None


def config_to_dict(cfg: ExperimentConfig) -> dict:
    def section_dict(section) -> dict:
        out = {}
        for f in dataclasses.fields(section):
            value = getattr(section, f.name)
            if f.name == "trajectories":
                value = [drift_model_to_dict(m) for m in value]
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    return {
        "seed": cfg.seed,
        "output_path": cfg.output_path,
        "worker_count": cfg.worker_count,
        "drift": drift_model_to_dict(cfg.drift),
        "sweep_lambda": section_dict(cfg.sweep_lambda),
        "sweep_n": section_dict(cfg.sweep_n),
        "mc_validate": section_dict(cfg.mc_validate),
        "train": section_dict(cfg.train),
    }


def load_config_file(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(data)


def save_config_file(path: str | Path, cfg: ExperimentConfig) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")
