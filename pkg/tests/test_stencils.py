import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs
from hypothesis.extra.numpy import arrays

from apmm import stencils as st
from apmm.analysis import observed_order

NS = [20, 40, 80, 160]


def _order(make, shift_in=0.0, shift_out=0.0):
    errs = []
    for n in NS:
        dx = 2 * np.pi / n
        x = np.arange(n) * dx
        d = make(dx).apply(np.sin(x + shift_in * dx)) - np.cos(x + shift_out * dx)
        errs.append(np.abs(d).max())
    return observed_order(errs, [1 / n for n in NS], drop_preasymptotic=False).slope


@pytest.mark.parametrize("order", [1, 3])
@pytest.mark.parametrize("side", [0, 1])
def test_upwind_orders(order, side):
    assert _order(lambda dx: st.upwind_pair(order, dx)[side]) == pytest.approx(order, abs=0.2)


@pytest.mark.parametrize("order", [2, 4])
def test_colocated_central_orders(order):
    assert _order(lambda dx: st.central(order, "colocated", dx)) == pytest.approx(order, abs=0.2)


def test_staggered_orders():
    assert _order(lambda dx: st.central(2, "g", dx), shift_out=0.5) == pytest.approx(2, abs=0.2)
    assert _order(lambda dx: st.central(2, "rho", dx), shift_in=0.5) == pytest.approx(2, abs=0.2)


def test_upwind_bias():
    minus, plus = st.upwind_pair(1, 1.0)
    assert minus.offsets == (-1, 0)
    assert plus.offsets == (0, 1)


def test_circ_placement():
    m = st.circ([1, 2, 3], 1, 5)
    np.testing.assert_array_equal(m[0], [2, 3, 0, 0, 1])
    np.testing.assert_array_equal(m[4], [3, 0, 0, 1, 2])


def test_banded_has_no_wrap():
    m = st.banded([1, 2, 3], 1, 3, 4)
    np.testing.assert_array_equal(m, [[2, 3, 0, 0], [1, 2, 3, 0], [0, 1, 2, 3]])


def test_invalid_orders():
    with pytest.raises(st.StencilError):
        st.upwind_pair(2, 0.1)
    with pytest.raises(st.StencilError):
        st.central(4, "g", 0.1)
    with pytest.raises(st.StencilError):
        st.central(3, "colocated", 0.1)
    with pytest.raises(st.StencilError):
        st.central(2, "nowhere", 0.1)


def test_matrix_too_small():
    with pytest.raises(st.StencilError):
        st.central(4, "colocated", 1.0).matrix(3)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 12, elements=hs.floats(-1e3, 1e3)),
       hs.sampled_from([("u", 1), ("u", 3), ("colocated", 2), ("colocated", 4), ("g", 2), ("rho", 2)]))
def test_apply_matches_matrix(u, spec):
    target, order = spec
    s = st.upwind_pair(order, 0.3)[0] if target == "u" else st.central(order, target, 0.3)
    np.testing.assert_allclose(s.apply(u), s.matrix(12) @ u, atol=1e-9 * (1 + np.abs(u).max()))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 9, elements=hs.floats(-10, 10)))
def test_difference_stencils_kill_constants_and_sum(u):
    for s in (st.central(4, "colocated", 0.5), st.central(2, "g", 0.5), st.upwind_pair(3, 0.5)[1]):
        np.testing.assert_allclose(s.apply(np.full(9, 2.5)), 0.0, atol=1e-12)
        # periodic differences have zero sum
        assert abs(s.apply(u).sum()) < 1e-9


def test_boundary_operators_exact_on_quadratics():
    n, length = 11, 2.0
    dx = length / (n - 1)
    x = np.arange(n) * dx
    u = x**2
    m = st.boundary_matrices(n, dx)
    bd = st.boundary_rho_vector(u[0], u[-1], dx, n)
    lap = m.cen_rho @ (m.cen_g @ u[1:-1] + bd)
    np.testing.assert_allclose(lap, 2.0, atol=1e-11)
    np.testing.assert_allclose(m.avg @ (x[:-1] + 0.5 * dx), x[1:-1], atol=1e-14)
    assert m.upw_minus.shape == (n - 1, n + 1)
    assert m.cen_g.shape == (n - 1, n - 2)


def test_boundary_grid_minimum():
    with pytest.raises(st.StencilError):
        st.boundary_matrices(3, 0.5)
