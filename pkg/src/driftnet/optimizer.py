"""Offline tuning of the exponential decay constant by simulated annealing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .calibration import WeightScheme, fit_wls
from .errors import ConfigError, InsufficientDataError
from ._kernels import prefix_fits
from .sensor import CalibrationTuple, _horner, invert_many, true_params_at


class TrainingTrace(NamedTuple):
    stimuli: np.ndarray  # known concentrations
    times: np.ndarray
    responses: np.ndarray

    def check(self, degree):
        n = len(self.stimuli)
        if not (n == len(self.times) == len(self.responses)):
            raise ConfigError("trace columns differ in length")
        if n < degree + 2:
            raise InsufficientDataError(f"trace of length {n} too short for degree {degree}")
        if np.any(np.diff(self.times) <= 0):
            raise ConfigError("trace timestamps must be strictly increasing")


@dataclass(frozen=True)
class AnnealingSchedule:
    initial_temp: float = 0.1
    cooling_rate: float = 0.99
    iterations: int = 500
    proposal_sigma: float = 0.2
    lambda_bounds: tuple = (0.0, 1.0)
    initial_lambda: float = 0.01

    def __post_init__(self):
        lo, hi = self.lambda_bounds
        if not 0 < self.cooling_rate < 1:
            raise ConfigError("cooling_rate must lie in (0, 1)")
        if not (0 <= lo <= hi):
            raise ConfigError("lambda_bounds must satisfy 0 <= min <= max")
        if not self.proposal_sigma > 0:
            raise ConfigError("proposal_sigma must be positive")
        if self.iterations < 0 or self.initial_temp <= 0:
            raise ConfigError("iterations must be >= 0 and initial_temp > 0")
        if not lo <= self.initial_lambda <= hi:
            raise ConfigError("initial_lambda outside lambda_bounds")


def synthesize_trace(initial, alpha, amplitude, rng, steps=200, noise_std=0.0):
    """Known-stimulus exposure: one uniform draw in ``(0, amplitude]`` per step."""
    times = np.arange(steps, dtype=float)
    stimuli = amplitude - rng.uniform(0.0, amplitude, steps)
    coeffs = np.array([true_params_at(initial, alpha, t).coeffs for t in times])
    responses = _horner(coeffs, stimuli)
    if noise_std > 0:
        responses = responses + rng.normal(0.0, noise_std, steps)
    return TrainingTrace(stimuli, times, responses)


def _default_x_max(trace):
    return 2.0 * float(np.max(trace.stimuli))


def lambda_objective(trace: TrainingTrace, lam, degree=2, x_max=None) -> float:
    """Mean relative error of one-step-ahead calibrated predictions along ``trace``.

    At every tuple after the first ``degree + 1`` the response model is re-fit
    on all earlier tuples with exponential age weights, the current response
    is inverted, and the result compared with the known stimulus.
    """
    trace.check(degree)
    if lam < 0:
        raise ValueError("decay constant must be >= 0")
    x_max = _default_x_max(trace) if x_max is None else x_max
    x = np.ascontiguousarray(trace.stimuli, dtype=float)
    t = np.ascontiguousarray(trace.times, dtype=float)
    y = np.ascontiguousarray(trace.responses, dtype=float)
    first = degree + 1
    fits, ok = prefix_fits(x, t, y, float(lam), first)
    if not ok.all():
        scheme = WeightScheme("exponential", lam)
        table = [CalibrationTuple(float(yy), float(xx), int(tt)) for xx, tt, yy in zip(x, t, y)]
        for i in np.flatnonzero(~ok):
            k = i + first
            fits[i] = fit_wls(table[:k], scheme, table[k].time, degree).coeffs
    est, _ = invert_many(fits, y[first:], x_max)
    truth = x[first:]
    return float(np.mean(np.abs(est - truth) / truth))


def _reflect(value, lo, hi):
    if hi == lo:
        return lo
    span = hi - lo
    v = math.fmod(value - lo, 2.0 * span)
    if v < 0:
        v += 2.0 * span
    return lo + (v if v <= span else 2.0 * span - v)


def optimize_lambda(trace, schedule=AnnealingSchedule(), seed=0, degree=2, x_max=None,
                    callback=None):
    """Simulated annealing over the decay constant; returns the best ``(lam, error)`` seen.

    ``callback(iteration, proposal, proposal_error, best_error, accepted)`` is
    invoked after every iteration when given.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lo, hi = schedule.lambda_bounds
    current = schedule.initial_lambda
    current_err = lambda_objective(trace, current, degree, x_max)
    best, best_err = current, current_err
    temp = schedule.initial_temp
    for it in range(schedule.iterations):
        proposal = _reflect(current + rng.normal(0.0, schedule.proposal_sigma), lo, hi)
        err = lambda_objective(trace, proposal, degree, x_max)
        delta = err - current_err
        accepted = delta <= 0 or rng.random() < math.exp(-delta / temp)
        if accepted:
            current, current_err = proposal, err
        if err < best_err:
            best, best_err = proposal, err
        if callback is not None:
            callback(it, proposal, err, best_err, accepted)
        temp *= schedule.cooling_rate
    return best, best_err


def grid_search_lambda(trace, bounds=(0.0, 1.0), points=200, degree=2, x_max=None):
    """Exhaustive scan of the objective on an even grid; returns ``(lam, error)``."""
    grid = np.linspace(bounds[0], bounds[1], points)
    errs = [lambda_objective(trace, lam, degree, x_max) for lam in grid]
    k = int(np.argmin(errs))
    return float(grid[k]), float(errs[k])
