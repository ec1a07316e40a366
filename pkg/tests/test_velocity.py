import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs
from hypothesis.extra.numpy import arrays

from apmm.velocity import VelocityGrid


def test_midpoint_points(grid):
    np.testing.assert_allclose(grid.v, np.arange(-4.5, 5.0, 1.0), atol=1e-15)
    assert grid.dv == 1.0
    np.testing.assert_array_equal(grid.v, -grid.v[::-1])


def test_from_spacing_matches_count():
    g = VelocityGrid.from_spacing(5.0, 1.0)
    assert g.n_v == 10
    with pytest.raises(ValueError):
        VelocityGrid.from_spacing(5.0, 0.3)


@pytest.mark.parametrize("n_v", [0, 7, -2])
def test_bad_counts(n_v):
    with pytest.raises(ValueError):
        VelocityGrid(5.0, n_v)


def test_moments(grid):
    assert grid.bracket(grid.M) == pytest.approx(1.0, abs=1e-15)
    assert abs(grid.bracket(grid.vM)) < 1e-16
    assert grid.half_bracket(grid.M) == pytest.approx(1.0, abs=1e-15)


def test_half_set_is_positive_velocities(grid):
    np.testing.assert_array_equal(grid.minus, grid.v > 0)


vectors = arrays(np.float64, (4, 10), elements=hs.floats(-1e3, 1e3))


@settings(max_examples=60, deadline=None)
@given(vectors)
def test_projections_idempotent(h):
    g = VelocityGrid(5.0, 10)
    for proj in (g.project_pi, g.project_pi_minus):
        once = proj(h)
        np.testing.assert_allclose(proj(once), once, atol=1e-12 * (1 + np.abs(h).max()))


@settings(max_examples=60, deadline=None)
@given(vectors)
def test_complement_has_zero_bracket(h):
    g = VelocityGrid(5.0, 10)
    rest = h - g.project_pi(h)
    assert np.abs(g.bracket(rest)).max() <= 1e-12 * (1 + np.abs(h).max())
    rest = h - g.project_pi_minus(h)
    assert np.abs(g.half_bracket(rest)).max() <= 1e-12 * (1 + np.abs(h).max())


def test_matrix_forms(grid, rng):
    h = rng.standard_normal(grid.n_v)
    np.testing.assert_allclose(grid.pi_matrix @ h, grid.project_pi(h), atol=1e-15)
    np.testing.assert_allclose(grid.pi_minus_matrix @ h, grid.project_pi_minus(h), atol=1e-15)
