"""Random-waypoint mobility on a bounded 2-D grid and rendezvous detection."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConfigError


@dataclass(frozen=True)
class GridBounds:
    width: float = 1000.0
    height: float = 1000.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ConfigError(f"grid must have positive extent, got {self.width}x{self.height}")

    def contains(self, point) -> bool:
        x, y = point
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def uniform(self, rng: np.random.Generator) -> tuple[float, float]:
        return (float(rng.uniform(0.0, self.width)), float(rng.uniform(0.0, self.height)))


@dataclass(frozen=True)
class MobilityState:
    """One node under the random-waypoint model.

    ``speed`` is in meters per step and ``pause_remaining`` counts whole steps.
    The speed and pause ranges ride along with the state so that a step only
    needs the bounds and a generator.
    """

    position: tuple[float, float]
    waypoint: tuple[float, float]
    speed: float
    pause_remaining: int
    v_min: float = 1.0
    v_max: float = 5.0
    pause_max: int = 5


@dataclass(frozen=True)
class RendezvousGroup:
    member_ids: frozenset
    timestamp: int

    def __post_init__(self):
        if len(self.member_ids) < 2:
            raise ValueError("a rendezvous needs at least two sensors")


def _check_ranges(v_min, v_max, pause_max):
    if not (0 < v_min <= v_max):
        raise ConfigError(f"need 0 < v_min <= v_max, got v_min={v_min}, v_max={v_max}")
    if pause_max < 0:
        raise ConfigError(f"pause_max must be >= 0, got {pause_max}")


def init_mobility(n, bounds, v_min=1.0, v_max=5.0, pause_max=5, seed=0):
    """Place ``n`` nodes uniformly over ``bounds``, each with a fresh waypoint and speed."""
    if n < 1:
        raise ConfigError(f"need at least one node, got n={n}")
    _check_ranges(v_min, v_max, pause_max)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    states = []
    for _ in range(n):
        position = bounds.uniform(rng)
        waypoint = bounds.uniform(rng)
        speed = float(rng.uniform(v_min, v_max))
        states.append(MobilityState(position, waypoint, speed, 0, v_min, v_max, int(pause_max)))
    return states


def step_mobility(state: MobilityState, bounds: GridBounds, rng: np.random.Generator) -> MobilityState:
    """Advance one node by a single step."""
    if state.pause_remaining > 0:
        return replace(state, pause_remaining=state.pause_remaining - 1)

    px, py = state.position
    wx, wy = state.waypoint
    dist = math.hypot(wx - px, wy - py)
    if dist > state.speed:
        frac = state.speed / dist
        nx = min(max(px + frac * (wx - px), 0.0), bounds.width)
        ny = min(max(py + frac * (wy - py), 0.0), bounds.height)
        return replace(state, position=(nx, ny))

    # arrival: snap, then pick the next leg
    waypoint = bounds.uniform(rng)
    speed = float(rng.uniform(state.v_min, state.v_max))
    pause = int(rng.integers(0, state.pause_max, endpoint=True))
    return replace(state, position=(wx, wy), waypoint=waypoint, speed=speed, pause_remaining=pause)


def find_rendezvous(positions, range_, timestamp=0):
    """Group sensors into connected components of the proximity graph.

    Two sensors are adjacent when their distance is at most ``range_``.
    Components with a single member are dropped. Groups come back ordered by
    their smallest member id.
    """
    if not range_ > 0:
        raise ValueError(f"range must be positive, got {range_}")
    pts = np.asarray(positions, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 2:
        return []
    diff = pts[:, None, :] - pts[None, :, :]
    adjacent = np.hypot(diff[..., 0], diff[..., 1]) <= range_
    np.fill_diagonal(adjacent, False)
    if not adjacent.any():
        return []
    _, labels = connected_components(csr_matrix(adjacent), directed=False)
    groups = {}
    for idx, label in enumerate(labels):
        groups.setdefault(label, []).append(idx)
    out = [
        RendezvousGroup(frozenset(members), timestamp)
        for members in groups.values()
        if len(members) >= 2
    ]
    out.sort(key=lambda g: min(g.member_ids))
    return out
