import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from apmm import collision as col
from apmm import stencils as st
from apmm.analysis import (
    ConvergenceStudy,
    GridMismatch,
    ap_residual,
    error,
    limit_fluxes,
    limit_scheme_check,
    observed_order,
    pi_tensor_eval,
)
from apmm.tableau import builtin
from apmm.velocity import VelocityGrid


def test_error_norms():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([1.0, 0.0, 3.0])
    assert error(a, b, "L2", dx=0.25) == pytest.approx(1.0)
    assert error(a, b, "Linf") == 2.0
    with pytest.raises(GridMismatch):
        error(a, b[:2])
    with pytest.raises(ValueError):
        error(a, b, "L1")


@settings(max_examples=60, deadline=None)
@given(hs.floats(0.5, 4.0), hs.floats(1e-3, 1e3))
def test_exact_power_law(p, c):
    h = np.array([0.1, 0.05, 0.01, 0.005, 0.001])
    fit = observed_order(c * h**p, h)
    assert fit.slope == pytest.approx(p, abs=1e-9)
    assert fit.used == (0, 1, 2, 3, 4)


def test_preasymptotic_point_dropped():
    h = np.array([0.5, 0.1, 0.05, 0.01, 0.005])
    e = 2 * h**2
    e[0] = 2 * 0.5**0.5
    fit = observed_order(e, h)
    assert 0 not in fit.used
    assert fit.slope == pytest.approx(2, abs=1e-9)
    assert observed_order(e, h, drop_preasymptotic=False).slope > 2.1


def test_order_input_checks():
    with pytest.raises(ValueError):
        observed_order([1, 2], [1, 2])
    with pytest.raises(ValueError):
        observed_order([1, 0, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        observed_order([1, 2, 3], [1, -2, 3])


def test_study_rows_use_inverse_grid_size():
    s = ConvergenceStudy("X", 1.0, "n_x", [10, 20, 40], [1.0, 0.25, 0.0625], [2.0, 0.5, 0.125])
    assert s.slope == pytest.approx(2.0)
    rows = s.rows()
    assert [r["param"] for r in rows] == [10, 20, 40]
    assert all(r["fitted_slope"] == s.slope for r in rows)


def test_ap_residual_vanishes_on_chapman_enskog_data(grid, L):
    n = 16
    x = np.arange(n) * 2 * np.pi / n
    rho = 1 + np.cos(x)
    cen = st.central(4, "colocated", 2 * np.pi / n)
    g = 1e-3 * np.multiply.outer(cen.apply(rho), col.pseudo_inverse_apply(L, grid.vM))
    assert ap_residual(rho, g, 1e-3, L, cen) < 1e-16
    assert ap_residual(rho, g, 1e-3, L, cen.matrix(n)) < 1e-16


PI_GRID = VelocityGrid(3.0, 6)
PI_L = col.bgk(PI_GRID)


@settings(max_examples=25, deadline=None)
@given(hs.sampled_from(["DP_A121", "DP2_A242", "DP1_A242"]), hs.integers(0, 2**31))
def test_pi_identities(name, seed):
    t = builtin(name)
    rng = np.random.default_rng(seed)
    gr = rng.standard_normal((t.s, 8))
    ar = rng.standard_normal((t.s, 8))
    for j in range(2, t.s + 1):
        for m in range(2, j + 1):
            lhs = pi_tensor_eval(t, j, j, m, gr, ar, PI_L).value
            rhs = sum(pi_tensor_eval(t, j, k, m - 1, gr, ar, PI_L).value for k in range(1, j))
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)
        for k1 in range(1, j):
            assert np.abs(pi_tensor_eval(t, j, k1, j, gr, ar, PI_L).value).max() <= 1e-12
    assert limit_scheme_check(t, gr, ar, PI_L) <= 1e-12


def test_first_stage_pi_is_closed_form(L):
    # j = 1: only the m = 1 term, which reduces to -a_11 lambda grad_rho
    t = builtin("DP_A121")
    rng = np.random.default_rng(0)
    gr = rng.standard_normal((t.s, 5))
    ar = rng.standard_normal((t.s, 5))
    alt, closed = limit_fluxes(t, 1, gr, ar, L)
    np.testing.assert_allclose(alt, closed, atol=1e-14)
    np.testing.assert_allclose(closed, t.a_implicit[0, 0] * col.kappa(L) * gr[0], atol=1e-14)


def test_ck_ars_labels_start_at_two(L):
    t = builtin("ARS222")
    gr = np.ones((t.s, 4))
    with pytest.raises(ValueError):
        pi_tensor_eval(t, 2, 1, 1, gr, gr, L)
    assert pi_tensor_eval(t, 2, 2, 1, gr, gr, L).value.shape == (4,)
