"""Polynomial drift model for a chemical sensor and inversion of its response."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._kernels import bisect_rows
from .errors import ConfigError

INVERSION_TOL = 1e-9
FALLBACK_GRID = 10_000


@dataclass(frozen=True)
class DriftParams:
    """Coefficients ``d_0 .. d_r`` of the response ``y = sum_j d_j x**j``."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) < 2:
            raise ConfigError("response polynomial needs degree >= 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def as_array(self):
        return np.asarray(self.coeffs, dtype=float)


class CalibrationTuple(NamedTuple):
    raw: float
    estimate: float
    time: int


@dataclass
class SensorState:
    """Mutable per-sensor record owned by the simulation loop.

    ``last_calibration`` is the step of the most recent successful re-fit and
    ``lam`` the tuned decay constant for exponential tuple weights.
    """

    id: int
    initial_params: DriftParams
    alpha: tuple
    estimated_params: DriftParams
    table: list = field(default_factory=list)
    last_calibration: int = 0
    lam: float = 0.0

    def __post_init__(self):
        self.alpha = tuple(float(a) for a in self.alpha)
        if len(self.alpha) != len(self.initial_params.coeffs):
            raise ConfigError("alpha must have one rate per drift coefficient")

    def params_at(self, t) -> DriftParams:
        return true_params_at(self.initial_params, self.alpha, t)

    def seed_table(self, stimuli, time=0):
        """Start the table from a known-stimulus calibration batch taken at ``time``."""
        if self.table:
            raise ValueError("table already has entries")
        params = self.params_at(time)
        self.table = [CalibrationTuple(measure(params, x), float(x), time) for x in stimuli]
        self.last_calibration = time

    def append(self, entry: CalibrationTuple, cap=None):
        if self.table and entry.time <= self.table[-1].time:
            raise ValueError("calibration table timestamps must increase")
        self.table.append(entry)
        if cap is not None and len(self.table) > cap:
            del self.table[: len(self.table) - cap]


def true_params_at(initial: DriftParams, alpha, t) -> DriftParams:
    """Linearly drifted coefficients ``d_j(0) * (1 + alpha_j * t)``."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return DriftParams(tuple(d * (1.0 + a * t) for d, a in zip(initial.coeffs, alpha)))


def _horner(coeffs, x):
    """Evaluate ``sum_j coeffs[j] * x**j``; works for scalars and arrays, coeffs along the last axis."""
    coeffs = np.asarray(coeffs, dtype=float)
    acc = np.zeros(np.broadcast_shapes(coeffs.shape[:-1], np.shape(x)))
    for j in range(coeffs.shape[-1] - 1, -1, -1):
        acc = acc * x + coeffs[..., j]
    return acc


def measure(params, x) -> float:
    """Raw output of a sensor with response ``params`` exposed to concentration ``x``."""
    coeffs = params.coeffs if isinstance(params, DriftParams) else params
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _increasing(coeffs, x_max):
    """Row-wise test that each polynomial is strictly increasing on ``[0, x_max]``."""
    deg = coeffs.shape[1] - 1
    deriv = coeffs[:, 1:] * np.arange(1, deg + 1)
    at_lo = _horner(deriv, 0.0)
    at_hi = _horner(deriv, x_max)
    ok = (at_lo >= 0) & (at_hi >= 0) & ((at_lo > 0) | (at_hi > 0))
    if deg <= 2:
        # derivative is affine, endpoints settle it
        return ok
    # otherwise the derivative's minimum sits at an endpoint or a root of the second derivative
    deriv2 = deriv[:, 1:] * np.arange(1, deg)
    for i in np.flatnonzero(ok):
        roots = np.polynomial.polynomial.polyroots(deriv2[i])
        real = roots[np.abs(roots.imag) < 1e-12].real
        inside = real[(real > 0) & (real < x_max)]
        if inside.size and np.min(_horner(deriv[i], inside)) < 0:
            ok[i] = False
    return ok


def _bisect(coeffs, ys, lo, hi, tol):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    while np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        below = _horner(coeffs, mid) < ys
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _scan(coeffs, y, x_max, tol):
    """Best-effort inversion of a non-monotone response by grid scan plus local bisection."""
    grid = np.linspace(0.0, x_max, FALLBACK_GRID)
    resid = _horner(coeffs, grid) - y
    k = int(np.argmin(np.abs(resid)))
    for a, b in ((k - 1, k), (k, k + 1)):
        if 0 <= a and b < len(grid) and resid[a] * resid[b] <= 0 and resid[a] != resid[b]:
            lo, hi, sign = grid[a], grid[b], np.sign(resid[b] - resid[a])
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if sign * (_horner(coeffs, mid) - y) < 0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
    return float(grid[k])


def invert_many(coeffs, ys, x_max, tol=INVERSION_TOL):
    """Invert a batch of responses, one polynomial (row of ``coeffs``) per reading.

    Returns ``(estimates, monotone)`` where ``monotone[i]`` is False when row
    ``i`` was not increasing on ``[0, x_max]`` and the grid-scan fallback ran.
    Linear and quadratic responses go through the compiled kernel.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    ys = np.ascontiguousarray(np.broadcast_to(np.asarray(ys, dtype=float), coeffs.shape[:1]))
    if coeffs.shape[1] <= 3:
        return bisect_rows(np.ascontiguousarray(coeffs), ys, float(x_max), tol, FALLBACK_GRID)
    return _invert_many_numpy(coeffs, ys, x_max, tol)


def _invert_many_numpy(coeffs, ys, x_max, tol=INVERSION_TOL):
    mono = _increasing(coeffs, x_max)
    out = np.empty(len(ys))
    if mono.any():
        c, y = coeffs[mono], ys[mono]
        f_lo = c[:, 0]
        f_hi = _horner(c, x_max)
        est = _bisect(c, y, np.zeros(len(y)), np.full(len(y), float(x_max)), tol)
        est = np.where(y <= f_lo, 0.0, est)
        est = np.where(y >= f_hi, float(x_max), est)
        out[mono] = est
    for i in np.flatnonzero(~mono):
        out[i] = _scan(coeffs[i], ys[i], x_max, tol)
    return out, mono


def invert_response(params, y, x_max, full_output=False):
    """Concentration in ``[0, x_max]`` whose modelled response best matches ``y``.

    With ``full_output`` the monotonicity flag is returned alongside the
    estimate, as ``(x, monotone)``.
    """
    coeffs = params.coeffs if isinstance(params, DriftParams) else params
    est, mono = invert_many([coeffs], [y], x_max)
    if full_output:
        return float(est[0]), bool(mono[0])
    return float(est[0])
