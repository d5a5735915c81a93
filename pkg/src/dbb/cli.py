"""Command-line entry point.

Subcommands:

* ``sweep-lambda``: Monte Carlo + closed-form MSE over a discount grid.
* ``sweep-n``: the same over a rollout-budget grid at a fixed discount.
* ``mc-validate``: 3-standard-error agreement test between simulated and
  closed-form MSE over a (lambda, trajectory) grid.
* ``train``: toy policy-gradient run with posterior snapshotting.

Every command is a deterministic function of (config, seed); worker count
changes scheduling only, never output bytes. Exit codes: 0 success, 1 config
error, 2 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from dbb.advantage import scheme_from_name
from dbb.config import (
    ConfigError,
    ExperimentConfig,
    load_config_file,
)
from dbb.simulator import SweepRecord, SweepSpec, argmin_lambda, run_sweep
from dbb.snapshot import load_snapshot, save_snapshot
from dbb.trainer import StepRecord, TrainerConfig, make_tasks, train

SWEEP_CSV_HEADER = [
    "lambda", "n", "epoch",
    "mse_dbb_emp", "mse_dbb_closed", "mse_pt_emp", "mse_pt_closed",
    "stderr_dbb", "stderr_pt",
]
METRICS_CSV_HEADER = ["step", "mean_reward", "entropy", "zero_var_frac", "clip_frac"]


def write_sweep_csv(path: str | Path, records: list[SweepRecord]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_HEADER)
        for r in records:
            writer.writerow([
                r.lam, r.n, r.epoch,
                r.mse_dbb_empirical, r.mse_dbb_closed,
                r.mse_point_empirical, r.mse_point_closed,
                r.stderr_dbb, r.stderr_point,
            ])


def read_sweep_csv(path: str | Path) -> list[SweepRecord]:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SWEEP_CSV_HEADER:
            raise ValueError("unexpected sweep CSV header")
        return [
            SweepRecord(
                lam=float(row[0]), n=int(row[1]), epoch=int(row[2]),
                mse_dbb_empirical=float(row[3]), mse_dbb_closed=float(row[4]),
                mse_point_empirical=float(row[5]), mse_point_closed=float(row[6]),
                stderr_dbb=float(row[7]), stderr_point=float(row[8]),
            )
            for row in reader
        ]


def write_metrics_csv(path: str | Path, records: list[StepRecord]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_CSV_HEADER)
        for r in records:
            writer.writerow([r.step, r.mean_reward, r.entropy, r.zero_var_frac, r.clip_frac])


def read_metrics_csv(path: str | Path) -> list[StepRecord]:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != METRICS_CSV_HEADER:
            raise ValueError("unexpected metrics CSV header")
        return [
            StepRecord(
                step=int(row[0]), mean_reward=float(row[1]), entropy=float(row[2]),
                zero_var_frac=float(row[3]), clip_frac=float(row[4]),
            )
            for row in reader
        ]


def _eval_epochs(section_epochs: tuple[int, ...], length: int) -> tuple[int, ...]:
    return section_epochs if section_epochs else (length,)


def _out_path(cfg: ExperimentConfig, default: str) -> str:
    return cfg.output_path if cfg.output_path else default


def cmd_sweep_lambda(cfg: ExperimentConfig) -> int:
    section = cfg.sweep_lambda
    spec = SweepSpec(
        trajectory=cfg.drift,
        lambdas=section.lambdas,
        group_sizes=(section.n,),
        replications=section.replications,
        eval_epochs=_eval_epochs(section.eval_epochs, cfg.drift.length),
        base_seed=cfg.seed,
        target=section.target,
    )
    records = run_sweep(spec, workers=cfg.worker_count)
    path = _out_path(cfg, "sweep_lambda.csv")
    write_sweep_csv(path, records)
    lam, mse = argmin_lambda(records, epoch=max(spec.eval_epochs))
    print(f"wrote {len(records)} records to {path}")
    print(f"argmin lambda={lam!r} mse_dbb_emp={mse!r} at epoch {max(spec.eval_epochs)}")
    return 0


def cmd_sweep_n(cfg: ExperimentConfig) -> int:
    section = cfg.sweep_n
    spec = SweepSpec(
        trajectory=cfg.drift,
        lambdas=(section.lam,),
        group_sizes=section.group_sizes,
        replications=section.replications,
        eval_epochs=_eval_epochs(section.eval_epochs, cfg.drift.length),
        base_seed=cfg.seed,
        target=section.target,
    )
    records = run_sweep(spec, workers=cfg.worker_count)
    path = _out_path(cfg, "sweep_n.csv")
    write_sweep_csv(path, records)
    print(f"wrote {len(records)} records to {path}")
    return 0


def cmd_mc_validate(cfg: ExperimentConfig) -> int:
    section = cfg.mc_validate
    lines = []
    passed = 0
    total = 0
    for trajectory in section.trajectories:
        spec = SweepSpec(
            trajectory=trajectory,
            lambdas=section.lambdas,
            group_sizes=(section.n,),
            replications=section.replications,
            eval_epochs=_eval_epochs(section.eval_epochs, trajectory.length),
            base_seed=cfg.seed,
        )
        for r in run_sweep(spec, workers=cfg.worker_count):
            ok_dbb = abs(r.mse_dbb_empirical - r.mse_dbb_closed) <= 3.0 * r.stderr_dbb
            ok_pt = abs(r.mse_point_empirical - r.mse_point_closed) <= 3.0 * r.stderr_point
            ok = ok_dbb and ok_pt
            passed += int(ok)
            total += 1
            lines.append(
                f"{trajectory.KIND} lambda={r.lam!r} epoch={r.epoch}: "
                f"dbb={'pass' if ok_dbb else 'FAIL'} point={'pass' if ok_pt else 'FAIL'}"
            )
    rate = passed / total
    lines.append(f"agreement: {passed}/{total} points within 3 stderr ({rate:.1%})")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if cfg.output_path:
        Path(cfg.output_path).write_text(report, encoding="ascii")
    return 0 if rate >= 0.95 else 2


def cmd_train(cfg: ExperimentConfig, state_in: str | None, state_out: str | None) -> int:
    section = cfg.train
    trainer_config = TrainerConfig(
        n_rollouts=section.n_rollouts,
        epochs=section.epochs,
        minibatch_size=section.minibatch_size,
        updates_per_batch=section.updates_per_batch,
        learning_rate=section.learning_rate,
        lam=section.lam,
        scheme=scheme_from_name(section.scheme),
        clip_low=section.clip_low,
        clip_high=section.clip_high,
        seed=cfg.seed,
    )
    initial = None
    if state_in is not None:
        try:
            snapshot_lam, initial = load_snapshot(state_in)
        except OSError as exc:
            raise ConfigError(f"cannot read snapshot: {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if snapshot_lam != trainer_config.lam:
            raise ConfigError("snapshot lambda mismatch")

    tasks = make_tasks(section.n_prompts, section.k_answers, cfg.seed)
    metrics = train(tasks, trainer_config, initial_posteriors=initial)

    path = _out_path(cfg, "train_metrics.csv")
    write_metrics_csv(path, metrics.records)
    if state_out is not None:
        save_snapshot(state_out, trainer_config.lam, metrics.posteriors)
    if metrics.records:
        best = max(r.mean_reward for r in metrics.records)
        final = metrics.records[-1].mean_reward
        print(f"wrote {len(metrics.records)} steps to {path}; "
              f"mean_reward final={final!r} best={best!r}")
    else:
        print(f"wrote 0 steps to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbb",
        description="Discounted Beta-Bernoulli reward estimation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, workers: bool = True) -> None:
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override global seed")
        p.add_argument("--out", type=str, default=None, help="override output path")
        if workers:
            p.add_argument("--workers", type=int, default=None, help="simulator worker count")

    p_lambda = sub.add_parser("sweep-lambda", help="MSE vs discount factor")
    common(p_lambda)

    p_n = sub.add_parser("sweep-n", help="MSE vs rollout budget")
    common(p_n)
    p_n.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="override the fixed discount factor")

    p_validate = sub.add_parser("mc-validate", help="closed form vs Monte Carlo agreement")
    common(p_validate)

    p_train = sub.add_parser("train", help="toy policy-gradient training run")
    common(p_train, workers=False)
    p_train.add_argument("--scheme", type=str, default=None,
                         choices=["grpo-point", "grpo-dbb", "drgrpo-point", "drgrpo-dbb"])
    p_train.add_argument("--lambda", dest="lam", type=float, default=None,
                         help="override the posterior discount factor")
    p_train.add_argument("--state-in", type=str, default=None, help="resume from snapshot")
    p_train.add_argument("--state-out", type=str, default=None, help="write final snapshot")
    return parser


def _load_with_overrides(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output_path=args.out)
    if getattr(args, "workers", None) is not None:
        cfg = dataclasses.replace(cfg, worker_count=args.workers)
    if getattr(args, "lam", None) is not None:
        if args.command == "sweep-n":
            cfg = dataclasses.replace(cfg, sweep_n=dataclasses.replace(cfg.sweep_n, lam=args.lam))
        elif args.command == "train":
            cfg = dataclasses.replace(cfg, train=dataclasses.replace(cfg.train, lam=args.lam))
    if getattr(args, "scheme", None) is not None:
        cfg = dataclasses.replace(cfg, train=dataclasses.replace(cfg.train, scheme=args.scheme))
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_with_overrides(args)
        if args.command == "sweep-lambda":
            return cmd_sweep_lambda(cfg)
        if args.command == "sweep-n":
            return cmd_sweep_n(cfg)
        if args.command == "mc-validate":
            return cmd_mc_validate(cfg)
        if args.command == "train":
            return cmd_train(cfg, args.state_in, args.state_out)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
