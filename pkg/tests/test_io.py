import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs
from hypothesis.extra.numpy import arrays

from apmm.analysis import ConvergenceStudy
from apmm.io import (
    CONVERGENCE_COLUMNS,
    read_profiles,
    read_table,
    write_convergence,
    write_profiles,
    write_table,
)

finite = hs.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=40, deadline=None)
@given(x=arrays(np.float64, hs.integers(1, 12), elements=finite), times=hs.lists(finite, min_size=1, max_size=4))
def test_profiles_round_trip_bit_exact(x, times, tmp_path_factory):
    path = tmp_path_factory.mktemp("io") / "p.csv"
    rng = np.random.default_rng(x.size)
    snaps = [(float(t), rng.standard_normal(x.size) * 10.0 ** rng.integers(-300, 300)) for t in dict.fromkeys(times)]
    write_profiles(path, x, snaps, {"note": "x"})
    meta, x2, snaps2 = read_profiles(path)
    assert meta == {"note": "x"}
    np.testing.assert_array_equal(x2, x)
    assert len(snaps2) == len(snaps)
    for (t, r), (t2, r2) in zip(snaps, snaps2):
        assert t == t2
        np.testing.assert_array_equal(r2, r)


def test_metadata_types_survive(tmp_path):
    meta = {"config": {"eps": [1.0, 0.0001], "name": "DP1_A242", "flag": True, "none": None}, "n": 3}
    path = write_table(tmp_path / "t.csv", ("a", "b"), [(1, "x"), (2, "y")], meta)
    back, cols = read_table(path)
    assert back == meta
    np.testing.assert_array_equal(cols["a"], [1.0, 2.0])
    assert cols["b"] == ["x", "y"]


def test_convergence_schema(tmp_path):
    s = ConvergenceStudy("DP1_A242", 1e-4, "dt", [0.1, 0.05, 0.01], [1e-2, 2.5e-3, 1e-4], [2e-2, 5e-3, 2e-4])
    path = write_convergence(tmp_path / "c.csv", [s])
    header = [l for l in path.read_text().splitlines() if not l.startswith("#")][0]
    assert tuple(header.split(",")) == CONVERGENCE_COLUMNS
    _, cols = read_table(path)
    np.testing.assert_array_equal(cols["L2_error"], s.l2)
    assert cols["fitted_slope"][0] == s.slope


def test_profile_shape_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_profiles(tmp_path / "p.csv", np.zeros(3), [(0.0, np.zeros(4))])
