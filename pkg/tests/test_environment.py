import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftnet.environment import PlumeField, concentration, concentration_grid, step_plume
from driftnet.errors import ConfigError
from driftnet.mobility import GridBounds

BOUNDS = GridBounds(1000.0, 1000.0)
FIELD = PlumeField(center=(400.0, 600.0), sigma_x=50.0, sigma_y=50.0, amplitude=100.0)


def test_peak_at_center():
    assert concentration(FIELD, FIELD.center) == 100.0


def test_one_sigma_value():
    assert concentration(FIELD, (450.0, 600.0)) == pytest.approx(100.0 * math.exp(-0.5), rel=1e-15)


def test_isotropic_field_depends_only_on_radius():
    xs, ys = np.meshgrid(np.linspace(0, 1000, 41), np.linspace(0, 1000, 41))
    r2 = (xs - 400.0) ** 2 + (ys - 600.0) ** 2
    radial = 100.0 * np.exp(-r2 / (2 * 50.0**2))
    np.testing.assert_allclose(concentration_grid(FIELD, xs, ys), radial, rtol=1e-12, atol=0)


def test_anisotropic_spreads():
    f = PlumeField((0.0, 0.0), sigma_x=10.0, sigma_y=40.0, amplitude=2.0)
    assert concentration(f, (10.0, 0.0)) == pytest.approx(concentration(f, (0.0, 40.0)))


def test_grid_matches_scalar():
    pts = np.random.default_rng(0).uniform(0, 1000, (50, 2))
    vec = concentration_grid(FIELD, pts[:, 0], pts[:, 1])
    np.testing.assert_allclose(vec, [concentration(FIELD, p) for p in pts], rtol=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(-300, 300), st.floats(-300, 300))
def test_reflection_symmetry_and_bounds(dx, dy):
    cx, cy = FIELD.center
    a = concentration(FIELD, (cx + dx, cy + dy))
    b = concentration(FIELD, (cx - dx, cy - dy))
    assert a == pytest.approx(b, rel=1e-12, abs=0)
    assert 0 < a <= FIELD.amplitude


def test_sampled_maximum_sits_nearest_center():
    xs, ys = np.meshgrid(np.linspace(0, 1000, 37), np.linspace(0, 1000, 37))
    vals = concentration_grid(FIELD, xs, ys)
    d = np.hypot(xs - 400.0, ys - 600.0)
    assert np.unravel_index(np.argmax(vals), vals.shape) == np.unravel_index(np.argmin(d), d.shape)


@pytest.mark.parametrize("kwargs", [{"sigma_x": 0.0}, {"sigma_y": -1.0}, {"amplitude": 0.0},
                                    {"walk_step": -1.0}])
def test_invalid_fields_rejected(kwargs):
    with pytest.raises(ConfigError):
        PlumeField(**kwargs)


def test_frozen_plume_stays_put():
    f = PlumeField(center=(123.0, 456.0), walk_step=0.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        f = step_plume(f, BOUNDS, rng)
    assert f.center == (123.0, 456.0)


def test_step_length_and_other_fields_unchanged():
    rng = np.random.default_rng(5)
    g = step_plume(FIELD, BOUNDS, rng)
    assert math.hypot(g.center[0] - 400.0, g.center[1] - 600.0) == pytest.approx(5.0)
    assert (g.sigma_x, g.sigma_y, g.amplitude, g.walk_step) == (50.0, 50.0, 100.0, 5.0)


def test_walk_stays_in_bounds_and_is_reproducible():
    def trace(seed):
        f = PlumeField(center=(5.0, 995.0), walk_step=30.0)
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(1000):
            f = step_plume(f, BOUNDS, rng)
            assert BOUNDS.contains(f.center)
            out.append(f.center)
        return out

    assert trace(9) == trace(9)
    assert trace(9) != trace(10)
