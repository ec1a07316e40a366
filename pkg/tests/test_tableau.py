import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from apmm.tableau import (
    DoubleButcherTableau,
    SchemeClass,
    TableauError,
    builtin,
    builtin_names,
    classify,
    dump_tableau,
    is_gsa,
    load_tableau,
    validate,
)

EXPECTED_CLASS = {
    "ARS111": SchemeClass.TYPE_CK_ARS,
    "ARS222": SchemeClass.TYPE_CK_ARS,
    "ARS443": SchemeClass.TYPE_CK_ARS,
    "DP_A121": SchemeClass.TYPE_A,
    "DP2_A242": SchemeClass.TYPE_A,
    "DP1_A242": SchemeClass.TYPE_A,
}

# (explicit order, implicit order) checked through the classical conditions
ORDERS = {
    "ARS111": (1, 1),
    "ARS222": (2, 2),
    "ARS443": (3, 3),
    "DP_A121": (1, 1),
    "DP2_A242": (2, 2),
    "DP1_A242": (2, 3),
}


def _order(a, b, c):
    conds = [
        abs(b.sum() - 1),
        abs(b @ c - 1 / 2),
        max(abs(b @ c**2 - 1 / 3), abs(b @ a @ c - 1 / 6)),
    ]
    p = 0
    for err in conds:
        if err > 1e-12:
            break
        p += 1
    return p


def test_registry_lists_all():
    assert sorted(builtin_names()) == sorted(EXPECTED_CLASS)


@pytest.mark.parametrize("name", sorted(EXPECTED_CLASS))
def test_builtins_valid_and_gsa(name):
    t = builtin(name)
    assert validate(t) == []
    assert is_gsa(t)
    assert classify(t) is EXPECTED_CLASS[name]


@pytest.mark.parametrize("name", sorted(ORDERS))
def test_order_conditions(name):
    t = builtin(name)
    pe = _order(t.a_explicit, t.b_explicit, t.c_explicit)
    pi = _order(t.a_implicit, t.b_implicit, t.c_implicit)
    assert (min(pe, 3), min(pi, 3)) == ORDERS[name]


def test_ars111_entries():
    t = builtin("ARS111")
    np.testing.assert_array_equal(t.a_explicit, [[0, 0], [1, 0]])
    np.testing.assert_array_equal(t.a_implicit, [[0, 0], [0, 1]])


def test_unknown_name_lists_available():
    with pytest.raises(TableauError, match="ARS111"):
        builtin("nope")


def test_shape_mismatch_rejected():
    with pytest.raises(TableauError):
        DoubleButcherTableau("bad", np.zeros((2, 2)), np.zeros((3, 3)), np.ones(2), np.ones(3))


def test_explicit_diagonal_flagged():
    t = DoubleButcherTableau("bad", [[1.0]], [[1.0]], [1.0], [1.0])
    assert any("a_explicit" in p for p in validate(t))


@pytest.mark.parametrize("name", sorted(EXPECTED_CLASS))
def test_dump_load_round_trip(name, tmp_path):
    t = builtin(name)
    path = tmp_path / f"{name}.txt"
    path.write_text(dump_tableau(t))
    back = load_tableau(path)
    for attr in ("a_explicit", "a_implicit", "b_explicit", "b_implicit"):
        np.testing.assert_array_equal(getattr(back, attr), getattr(t, attr))


@settings(max_examples=50, deadline=None)
@given(hs.floats(0.05, 0.95), hs.floats(0.05, 0.95))
def test_random_two_stage_classification(g, d):
    # two-stage SDIRK pair: invertible implicit matrix, GSA by construction
    ai = [[g, 0.0], [1 - g, g]]
    ae = [[0.0, 0.0], [d, 0.0]]
    t = DoubleButcherTableau("r", ae, ai, [d, 0.0], [1 - g, g])
    assert classify(t) is SchemeClass.TYPE_A
    assert is_gsa(t) == (abs(d - 1.0) < 1e-12)
