"""Ground-truth concentration: a 2-D Gaussian plume whose center random-walks."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class PlumeField:
    center: tuple[float, float] = (500.0, 500.0)
    sigma_x: float = 50.0
    sigma_y: float = 50.0
    amplitude: float = 100.0
    walk_step: float = 5.0

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise ConfigError("plume spreads must be positive")
        if not self.amplitude > 0:
            raise ConfigError("plume amplitude must be positive")
        if self.walk_step < 0:
            raise ConfigError("walk_step must be >= 0")


def concentration(field: PlumeField, pos) -> float:
    """Plume concentration at ``pos``; peaks at ``field.amplitude`` on the center."""
    cx, cy = field.center
    dx = (pos[0] - cx) / field.sigma_x
    dy = (pos[1] - cy) / field.sigma_y
    return field.amplitude * math.exp(-0.5 * (dx * dx + dy * dy))


def concentration_grid(field: PlumeField, xs, ys):
    """Vectorised :func:`concentration` over arrays of coordinates."""
    cx, cy = field.center
    dx = (np.asarray(xs, dtype=float) - cx) / field.sigma_x
    dy = (np.asarray(ys, dtype=float) - cy) / field.sigma_y
    return field.amplitude * np.exp(-0.5 * (dx * dx + dy * dy))


def step_plume(field: PlumeField, bounds, rng: np.random.Generator) -> PlumeField:
    """Move the center ``walk_step`` meters in a uniformly random direction, clamped to bounds."""
    theta = rng.uniform(0.0, 2.0 * math.pi)
    cx = field.center[0] + field.walk_step * math.cos(theta)
    cy = field.center[1] + field.walk_step * math.sin(theta)
    cx = min(max(cx, 0.0), bounds.width)
    cy = min(max(cy, 0.0), bounds.height)
    return replace(field, center=(cx, cy))
