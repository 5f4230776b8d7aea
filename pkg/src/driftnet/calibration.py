"""Consensus ground-truth estimation and weighted least-squares re-calibration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigError, InsufficientDataError
from .sensor import CalibrationTuple, DriftParams, invert_many

KINDS = ("uniform", "reciprocal_age", "exponential")
STALENESS_EPS = 1.0
AGE_EPS = 1.0
RIDGE = 1e-10


@dataclass(frozen=True)
class WeightScheme:
    """How calibration tuples are weighted by age.

    For ``kind="exponential"`` a ``lam`` of None means each sensor uses its
    own tuned decay constant.
    """

    kind: str = "uniform"
    lam: float | None = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown weight scheme {self.kind!r}; expected one of {KINDS}")
        if self.lam is not None and self.lam < 0:
            raise ConfigError("decay constant must be >= 0")

    def for_sensor(self, sensor) -> "WeightScheme":
        if self.kind == "exponential" and self.lam is None:
            return WeightScheme("exponential", sensor.lam)
        return self


UNIFORM = WeightScheme("uniform")
RECIPROCAL_AGE = WeightScheme("reciprocal_age")


class ConsensusInput(NamedTuple):
    estimates: list  # (estimate, last_calibration) pairs
    now: int


def tuple_weights(scheme: WeightScheme, now, times):
    """Vectorised :func:`tuple_weight` over an array of tuple timestamps."""
    ages = now - np.asarray(times, dtype=float)
    if np.any(ages < 0):
        raise ValueError("tuple timestamp lies in the future")
    if scheme.kind == "uniform":
        return np.ones_like(ages)
    if scheme.kind == "exponential":
        return np.exp(-scheme.lam * ages)
    return 1.0 / (ages + AGE_EPS)


def tuple_weight(scheme: WeightScheme, now, t_k) -> float:
    return float(tuple_weights(scheme, now, [t_k])[0])


def staleness_weights(now, last_calibrations, kind="reciprocal", rate=0.01):
    """Unnormalised neighbour weights that shrink with time since last calibration."""
    ages = now - np.asarray(last_calibrations, dtype=float)
    if np.any(ages < 0):
        raise ValueError("last calibration lies in the future")
    if kind == "reciprocal":
        return 1.0 / (ages + STALENESS_EPS)
    if kind == "exponential":
        return np.exp(-rate * ages)
    raise ConfigError(f"unknown staleness kind {kind!r}")


def consensus_estimate(inp: ConsensusInput, kind="reciprocal", rate=0.01) -> float:
    """Staleness-weighted mean of the neighbours' calibrated readings."""
    if not inp.estimates:
        raise ValueError("consensus needs at least one estimate")
    values = np.array([e for e, _ in inp.estimates], dtype=float)
    w = staleness_weights(inp.now, [tau for _, tau in inp.estimates], kind, rate)
    rho = w / w.sum()
    return float(rho @ values)


def fit_wls(table, scheme: WeightScheme, now, degree=2) -> DriftParams:
    """Fit response coefficients to a calibration table by weighted least squares.

    Minimises ``sum_k w_k (sum_j g_j xhat_k**j - y_k)**2`` through a QR solve of
    the row-scaled Vandermonde system. A tiny ridge on the normal equations is
    used only when the weighted design is numerically rank deficient.
    """
    ncoef = degree + 1
    if len(table) < ncoef:
        raise InsufficientDataError(f"{len(table)} tuples, need {ncoef}")
    raw = np.fromiter((e.raw for e in table), float, len(table))
    est = np.fromiter((e.estimate for e in table), float, len(table))
    times = np.fromiter((e.time for e in table), float, len(table))
    if len(np.unique(est)) < ncoef:
        raise InsufficientDataError(f"fewer than {ncoef} distinct estimates")

    sw = np.sqrt(tuple_weights(scheme, now, times))
    A = np.vander(est, ncoef, increasing=True) * sw[:, None]
    b = raw * sw
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    if diag.min() <= diag.max() * max(A.shape) * np.finfo(float).eps:
        coeffs = np.linalg.solve(A.T @ A + RIDGE * np.eye(ncoef), A.T @ b)
    else:
        coeffs = solve_triangular(R, Q.T @ b)
    return DriftParams(tuple(coeffs))


def rendezvous_update(group, sensors, readings, now, scheme: WeightScheme, x_max,
                      table_cap=256, staleness="reciprocal", staleness_rate=0.01):
    """Exchange estimates within one rendezvous group and re-calibrate its members.

    ``sensors`` maps id to :class:`SensorState` and ``readings`` maps id to the
    raw output at ``now``. Member states are updated in place; members whose
    tables cannot support a fit yet keep their parameters and calibration time.
    Returns ``(members, consensus)``.
    """
    ids = sorted(group.member_ids)
    members = [sensors[i] for i in ids]
    ys = np.array([readings[i] for i in ids], dtype=float)
    coeffs = np.array([m.estimated_params.coeffs for m in members])
    own, _ = invert_many(coeffs, ys, x_max)
    xhat = consensus_estimate(
        ConsensusInput([(float(e), m.last_calibration) for e, m in zip(own, members)], now),
        staleness, staleness_rate,
    )
    for m, y in zip(members, ys):
        m.append(CalibrationTuple(float(y), xhat, now), table_cap)
        try:
            m.estimated_params = fit_wls(m.table, scheme.for_sensor(m), now,
                                         m.estimated_params.degree)
        except InsufficientDataError:
            continue
        m.last_calibration = now
    return members, xhat
