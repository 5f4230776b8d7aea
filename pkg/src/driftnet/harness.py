"""Experiment orchestration: single conditions, weight comparison and size sweep."""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .calibration import RECIPROCAL_AGE, UNIFORM, WeightScheme, rendezvous_update
from .config import ExperimentConfig
from .environment import PlumeField, concentration_grid, step_plume
from .errors import ConfigError
from .mobility import GridBounds, find_rendezvous, init_mobility, step_mobility
from .optimizer import optimize_lambda, synthesize_trace
from .sensor import DriftParams, SensorState, _horner, invert_many

# weight scheme behind each named condition; None marks the no-update baseline
CONDITION_SCHEMES = {
    "uncalibrated": None,
    "uniform": UNIFORM,
    "linear": RECIPROCAL_AGE,
    "optimized": WeightScheme("exponential", None),
}


@dataclass
class RunMetrics:
    """Per-step record of one simulated deployment."""

    condition: str
    repetition: int
    errors: np.ndarray  # mean error across sensors, % of plume amplitude
    rendezvous: np.ndarray  # number of groups per step
    lambdas: list = field(default_factory=list)
    nonmonotone: int = 0

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors))

    @property
    def final_error(self) -> float:
        return float(self.errors[-1])

    def same_as(self, other: "RunMetrics") -> bool:
        return (
            np.array_equal(self.errors, other.errors)
            and np.array_equal(self.rendezvous, other.rendezvous)
            and self.lambdas == other.lambdas
            and self.nonmonotone == other.nonmonotone
        )


def rep_seed(config: ExperimentConfig, repetition: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([config.seed, repetition])


def _streams(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    mob, plume, drift, noise, train = ss.spawn(5)
    return (np.random.default_rng(mob), np.random.default_rng(plume),
            np.random.default_rng(drift), np.random.default_rng(noise), train)


def init_sensors(config: ExperimentConfig, rng) -> list:
    """Draw initial drift coefficients; every sensor starts perfectly calibrated.

    With ``anchor_points > 0`` each table is seeded with the deployment
    calibration: that many evenly spaced known stimuli on ``[0, amplitude]``.
    """
    lows = np.array([lo for lo, _ in config.drift_init_ranges])
    highs = np.array([hi for _, hi in config.drift_init_ranges])
    anchors = np.linspace(0.0, config.plume.amplitude, config.anchor_points)
    sensors = []
    for i in range(config.n_sensors):
        params = DriftParams(tuple(rng.uniform(lows, highs)))
        sensor = SensorState(i, params, config.alpha, params)
        if config.anchor_points:
            sensor.seed_table(anchors)
        sensors.append(sensor)
    return sensors


def train_lambdas(config: ExperimentConfig, sensors, train_seed) -> list:
    """Tune each sensor's decay constant offline on a synthetic known-stimulus trace."""
    if config.shared_lambda is not None:
        return [float(config.shared_lambda)] * len(sensors)
    schedule = config.annealing.schedule()
    lams = []
    for sensor, child in zip(sensors, train_seed.spawn(len(sensors))):
        trace_ss, sa_ss = child.spawn(2)
        trace = synthesize_trace(sensor.initial_params, sensor.alpha, config.plume.amplitude,
                                 np.random.default_rng(trace_ss), config.training_steps,
                                 config.training_noise)
        lam, _ = optimize_lambda(trace, schedule, np.random.default_rng(sa_ss),
                                 config.degree, config.x_max)
        lams.append(float(lam))
    return lams


def run_condition(config: ExperimentConfig, scheme, seed, repetition=0, condition=None) -> RunMetrics:
    """Simulate one deployment under one weighting condition.

    ``scheme`` is a :class:`WeightScheme`, a condition name, or None for the
    uncalibrated baseline. Mobility, plume and drift draws come from streams
    that do not depend on the scheme, so every condition sees the same traces.
    """
    if isinstance(scheme, str):
        if scheme not in CONDITION_SCHEMES:
            raise ConfigError(f"unknown condition {scheme!r}")
        condition = condition or scheme
        scheme = CONDITION_SCHEMES[scheme]
    condition = condition or (scheme.kind if scheme is not None else "uncalibrated")

    mob_rng, plume_rng, drift_rng, noise_rng, train_seed = _streams(seed)
    bounds = GridBounds(config.grid.width, config.grid.height)
    mc = config.mobility
    states = init_mobility(config.n_sensors, bounds, mc.v_min, mc.v_max, mc.pause_max, mob_rng)
    pc = config.plume
    plume = PlumeField(bounds.uniform(plume_rng), pc.sigma_x, pc.sigma_y, pc.amplitude, pc.walk_step)
    sensors = init_sensors(config, drift_rng)

    lambdas = []
    if scheme is not None and scheme.kind == "exponential" and scheme.lam is None:
        lambdas = train_lambdas(config, sensors, train_seed)
        for s, lam in zip(sensors, lambdas):
            s.lam = lam

    n = config.n_sensors
    init_coeffs = np.array([s.initial_params.coeffs for s in sensors])
    alpha = np.array([s.alpha for s in sensors])
    est_coeffs = init_coeffs.copy()
    errors = np.empty(config.steps)
    counts = np.zeros(config.steps, dtype=int)
    nonmono = 0
    for step in range(config.steps):
        t = step + 1
        plume = step_plume(plume, bounds, plume_rng)
        states = [step_mobility(s, bounds, mob_rng) for s in states]
        pos = np.array([s.position for s in states])
        truth = concentration_grid(plume, pos[:, 0], pos[:, 1])
        raw = _horner(init_coeffs * (1.0 + alpha * t), truth)
        if config.noise_std > 0:
            raw = raw + noise_rng.normal(0.0, config.noise_std, n)

        groups = find_rendezvous(pos, config.range, t)
        counts[step] = len(groups)
        if scheme is not None and groups:
            readings = dict(enumerate(raw.tolist()))
            for g in groups:
                rendezvous_update(g, sensors, readings, t, scheme, config.x_max,
                                  config.table_cap, config.staleness, config.staleness_rate)
                for i in g.member_ids:
                    est_coeffs[i] = sensors[i].estimated_params.coeffs

        est, mono = invert_many(est_coeffs, raw, config.x_max)
        nonmono += int(np.count_nonzero(~mono))
        errors[step] = float(np.mean(np.abs(est - truth))) / pc.amplitude * 100.0
    return RunMetrics(condition, repetition, errors, counts, lambdas, nonmono)


def _run_task(args):
    config, condition, repetition = args
    return run_condition(config, condition, rep_seed(config, repetition), repetition, condition)


def workers_from_env(default=1) -> int:
    raw = os.environ.get("DRIFTNET_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"DRIFTNET_THREADS must be an integer, got {raw!r}") from exc


def run_tasks(tasks, workers=None) -> list:
    """Run ``(config, condition, repetition)`` tasks, preserving input order."""
    workers = workers_from_env() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks))


def paired_permutation_p(a, b) -> float:
    """Two-sided p-value of the mean paired difference, exact over all sign flips."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.array_equal(a, b):
        return 1.0
    res = stats.permutation_test(
        (a, b), lambda x, y, axis: np.mean(x - y, axis=axis),
        permutation_type="samples", vectorized=True, n_resamples=np.inf,
        alternative="two-sided",
    )
    return float(res.pvalue)


def run_weight_comparison(config: ExperimentConfig, workers=None) -> dict:
    """Every condition on the same per-repetition traces.

    Returns a dict with the per-run metrics and a JSON-ready ``summary``.
    """
    tasks = [(config, c, r) for c in config.conditions for r in range(config.repetitions)]
    runs = run_tasks(tasks, workers)
    by_cond = {c: [m for m in runs if m.condition == c] for c in config.conditions}
    matrix = {c: [m.mean_error for m in ms] for c, ms in by_cond.items()}
    summary = {"experiment": "compare-weights", "conditions": {}, "reductions_pct": {},
               "p_values": {}, "lambdas": {}, "config": config.to_dict()}
    for c, ms in by_cond.items():
        time_avg = np.array(matrix[c])
        final = np.array([m.final_error for m in ms])
        summary["conditions"][c] = {
            "time_avg_error_mean": float(time_avg.mean()),
            "time_avg_error_std": float(time_avg.std(ddof=1)) if len(time_avg) > 1 else 0.0,
            "final_error_mean": float(final.mean()),
            "final_error_std": float(final.std(ddof=1)) if len(final) > 1 else 0.0,
            "per_repetition": [float(v) for v in time_avg],
            "rendezvous_per_step": float(np.mean([m.rendezvous.mean() for m in ms])),
            "nonmonotone_inversions": int(sum(m.nonmonotone for m in ms)),
        }
        if any(m.lambdas for m in ms):
            summary["lambdas"][c] = [m.lambdas for m in ms]
    if "uncalibrated" in matrix:
        base = np.array(matrix["uncalibrated"])
        for c in config.conditions:
            if c == "uncalibrated":
                continue
            summary["reductions_pct"][c] = float((1.0 - np.mean(matrix[c]) / base.mean()) * 100.0)
            summary["p_values"][f"{c}_vs_uncalibrated"] = paired_permutation_p(matrix[c], base)
    for a, b in (("uniform", "linear"), ("linear", "optimized"), ("uniform", "optimized")):
        if a in matrix and b in matrix:
            summary["p_values"][f"{b}_vs_{a}"] = paired_permutation_p(matrix[b], matrix[a])
    return {"runs": runs, "matrix": matrix, "summary": summary}


def run_size_sweep(config: ExperimentConfig, sizes=None, condition="optimized", workers=None) -> dict:
    """The chosen condition across network sizes; reports error and contact rate per size."""
    sizes = tuple(config.sizes if sizes is None else sizes)
    if not sizes:
        raise ConfigError("sizes must be non-empty")
    tasks = [(dataclasses.replace(config, n_sensors=int(n)), condition, r)
             for n in sizes for r in range(config.repetitions)]
    runs = run_tasks(tasks, workers)
    table = []
    for i, n in enumerate(sizes):
        ms = runs[i * config.repetitions:(i + 1) * config.repetitions]
        for m in ms:
            m.condition = f"{condition}@{n}"
        table.append({
            "n_sensors": int(n),
            "mean_error": float(np.mean([m.mean_error for m in ms])),
            "std_error": float(np.std([m.mean_error for m in ms], ddof=1)) if len(ms) > 1 else 0.0,
            "rendezvous_per_step": float(np.mean([m.rendezvous.mean() for m in ms])),
        })
    errs = [row["mean_error"] for row in table]
    rates = [row["rendezvous_per_step"] for row in table]
    summary = {"experiment": "sweep-size", "condition": condition, "sizes": table,
               "error_size_spearman": _spearman(sizes, errs),
               "rendezvous_size_spearman": _spearman(sizes, rates),
               "lambdas": {m.condition: m.lambdas for m in runs if m.lambdas and m.repetition == 0},
               "config": dataclasses.replace(config, sizes=sizes).to_dict()}
    return {"runs": runs, "table": table, "summary": summary}


def _spearman(x, y):
    if len(x) < 2:
        return None
    rho = stats.spearmanr(x, y).statistic
    return None if np.isnan(rho) else float(rho)


def write_outputs(out_dir, name, runs, summary):
    """Write ``<name>.csv`` (one row per condition, repetition and step) and ``<name>.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write("condition,repetition,step,mean_error_pct,rendezvous_count\n")
        for m in runs:
            for step, (err, cnt) in enumerate(zip(m.errors, m.rendezvous), start=1):
                fh.write(f"{m.condition},{m.repetition},{step},{float(err)!r},{int(cnt)}\n")
    json_path = out_dir / f"{name}.json"
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
