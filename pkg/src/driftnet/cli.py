"""Command-line front end for the experiment harness."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .config import CONDITIONS, load_config
from .errors import ConfigError
from .optimizer import lambda_objective, optimize_lambda, synthesize_trace

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
VERBS = ("run", "compare-weights", "sweep-size", "tune-lambda", "validate-config")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="driftnet",
        description="Simulate opportunistic calibration of drifting mobile gas sensors.",
    )
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("--config", help="TOML or JSON experiment config")
    parser.add_argument("--out", default="driftnet-out", help="output directory")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config field; repeatable")
    parser.add_argument("--condition", default="optimized", choices=CONDITIONS,
                        help="condition for `run`")
    parser.add_argument("--repetition", type=int, default=0,
                        help="repetition whose sensors `tune-lambda` reports")
    return parser


def _print_conditions(summary):
    for name, row in summary["conditions"].items():
        print(f"{name:>13}: {row['time_avg_error_mean']:.4f} +/- {row['time_avg_error_std']:.4f} % "
              f"(final {row['final_error_mean']:.4f} %, {row['rendezvous_per_step']:.3f} rendezvous/step)")


def _cmd_run(config, args):
    tasks = [(config, args.condition, r) for r in range(config.repetitions)]
    runs = harness.run_tasks(tasks)
    errs = np.array([m.mean_error for m in runs])
    summary = {
        "experiment": "run",
        "conditions": {args.condition: {
            "time_avg_error_mean": float(errs.mean()),
            "time_avg_error_std": float(errs.std(ddof=1)) if len(errs) > 1 else 0.0,
            "final_error_mean": float(np.mean([m.final_error for m in runs])),
            "final_error_std": float(np.std([m.final_error for m in runs], ddof=1)) if len(runs) > 1 else 0.0,
            "per_repetition": errs.tolist(),
            "rendezvous_per_step": float(np.mean([m.rendezvous.mean() for m in runs])),
            "nonmonotone_inversions": int(sum(m.nonmonotone for m in runs)),
        }},
        "lambdas": {args.condition: [m.lambdas for m in runs]} if runs[0].lambdas else {},
        "config": config.to_dict(),
    }
    harness.write_outputs(args.out, "run", runs, summary)
    _print_conditions(summary)


def _cmd_compare(config, args):
    result = harness.run_weight_comparison(config)
    summary = result["summary"]
    harness.write_outputs(args.out, "compare-weights", result["runs"], summary)
    _print_conditions(summary)
    for name, pct in summary["reductions_pct"].items():
        print(f"{name:>13}: {pct:+.1f} % vs uncalibrated")


def _cmd_sweep(config, args):
    result = harness.run_size_sweep(config)
    harness.write_outputs(args.out, "sweep-size", result["runs"], result["summary"])
    for row in result["table"]:
        print(f"n={row['n_sensors']:>3}: {row['mean_error']:.4f} % error, "
              f"{row['rendezvous_per_step']:.3f} rendezvous/step")


def _cmd_tune(config, args):
    seed = harness.rep_seed(config, args.repetition)
    _, _, drift_rng, _, train_seed = harness._streams(seed)
    sensors = harness.init_sensors(config, drift_rng)
    schedule = config.annealing.schedule()
    rows = []
    for sensor, child in zip(sensors, train_seed.spawn(len(sensors))):
        trace_ss, sa_ss = child.spawn(2)
        trace = synthesize_trace(sensor.initial_params, sensor.alpha, config.plume.amplitude,
                                 np.random.default_rng(trace_ss), config.training_steps,
                                 config.training_noise)
        lam, err = optimize_lambda(trace, schedule, np.random.default_rng(sa_ss),
                                   config.degree, config.x_max)
        start = lambda_objective(trace, schedule.initial_lambda, config.degree, config.x_max)
        rows.append({"sensor": sensor.id, "lambda": lam, "objective": err,
                     "objective_at_initial": start})
        print(f"sensor {sensor.id:>3}: lambda={lam:.5f} objective={err:.5f} "
              f"(initial {start:.5f})")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"experiment": "tune-lambda", "repetition": args.repetition,
               "sensors": rows, "config": config.to_dict()}
    (out / "tune-lambda.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _cmd_validate(config, args):
    print(json.dumps(config.to_dict(), indent=2, sort_keys=True))


COMMANDS = {
    "run": _cmd_run,
    "compare-weights": _cmd_compare,
    "sweep-size": _cmd_sweep,
    "tune-lambda": _cmd_tune,
    "validate-config": _cmd_validate,
}


def parse_and_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        config = load_config(args.config, args.overrides)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        harness.workers_from_env()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            COMMANDS[args.verb](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
