import math

import pytest

from apmm.config import ConfigError, ExperimentConfig, load_config, parse_overrides


def test_periodic_defaults():
    c = ExperimentConfig()
    assert c.geometry == "periodic"
    assert c.length == pytest.approx(2 * math.pi)
    assert c.n_x == [50] and c.t_final == 0.5
    assert c.dt == [0.1, 0.05, 0.01, 0.005, 0.001]
    assert (c.v_max, c.dv) == (5.0, 1.0)
    assert c.central_order == 4


def test_inflow_defaults():
    c = ExperimentConfig(model="inflow")
    assert c.geometry == "inflow"
    assert (c.length, c.n_x, c.t_final) == (2.0, [20], 0.1)


def test_staggered_central_order():
    assert ExperimentConfig(staggered=True).central_order == 2


def test_ini_file_and_overrides(tmp_path):
    path = tmp_path / "e.ini"
    path.write_text("[experiment]\nmodel = advdiff\ntableau = ARS443, DP1_A242\neps = 1, 1e-4\n"
                    "staggered = yes\nupwind-order = 1\nn_x = 20\n")
    c = load_config(path, drift=0.25)
    assert c.model == "advdiff" and c.tableau == ["ARS443", "DP1_A242"]
    assert c.eps == [1.0, 1e-4] and c.staggered and c.upwind_order == 1 and c.drift == 0.25


def test_defaults_lose_to_file(tmp_path):
    path = tmp_path / "e.ini"
    path.write_text("[experiment]\nn_x = 30\n")
    c = load_config(path, defaults={"n_x": [20, 40], "t_final": 0.01})
    assert c.n_x == [30] and c.t_final == 0.01


def test_parse_overrides():
    kw = parse_overrides(["eps=1,0.5", "snapshot_every=none", "plot=true", "boundary=custom"])
    assert kw == {"eps": [1.0, 0.5], "snapshot_every": None, "plot": True, "boundary": "custom"}


@pytest.mark.parametrize("pairs", [["eps"], ["bogus=1"], ["n_x=a"], ["plot=maybe"]])
def test_bad_overrides(pairs):
    with pytest.raises(ConfigError):
        parse_overrides(pairs)


@pytest.mark.parametrize("kw", [
    dict(model="nope"), dict(tableau=["XYZ"]), dict(eps=[]), dict(eps=[-1.0]), dict(dt=[0.0]),
    dict(model="inflow", geometry="periodic"), dict(model="micromacro", geometry="inflow"),
    dict(model="advdiff", eps=[3.0]), dict(init="maybe"), dict(boundary="custom"),
    dict(reference="exact"), dict(workers=0), dict(n_x=[3]),
])
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kw)


def test_missing_file_or_section(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")
    p = tmp_path / "x.ini"
    p.write_text("[other]\na = 1\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_to_dict_reconstructs():
    c = ExperimentConfig(model="inflow", eps=[1e-4], boundary="scaled-velocity")
    assert ExperimentConfig(**c.to_dict()) == c
