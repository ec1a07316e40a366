import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from apmm import collision as col
from apmm.periodic import (
    ConfigError,
    MicroMacroSolver,
    RunConfig,
    SolverError,
    StageHistory,
    init_non_well_prepared,
    init_well_prepared,
    solve,
)
from apmm.tableau import builtin, builtin_names

from oracles import monolithic_step

cos1 = lambda x: 1 + np.cos(x)  # noqa: E731


@pytest.mark.parametrize("name", builtin_names())
@pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-4])
def test_step_matches_monolithic_colocated(name, eps):
    cfg = RunConfig(builtin(name), eps, 0.02, 0.02, n_x=12)
    s = MicroMacroSolver(cfg)
    x0 = init_non_well_prepared(cfg, cos1)
    rho, g = monolithic_step(s, x0)
    out = s.step(x0)
    np.testing.assert_allclose(out.rho, rho, rtol=0, atol=1e-11)
    # the coupled oracle system carries eps^-2 entries; its rounding grows like 1/eps
    np.testing.assert_allclose(out.g, g, rtol=0, atol=1e-12 * np.abs(g).max() / eps)


@pytest.mark.parametrize("name", ["ARS443", "DP1_A242"])
@pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-4])
def test_step_matches_monolithic_staggered_drift(name, eps):
    cfg = RunConfig(builtin(name), eps, 0.01, 0.01, n_x=12, upwind_order=1, central_order=2,
                    staggered=True, drift=0.5)
    s = MicroMacroSolver(cfg)
    x0 = init_non_well_prepared(cfg, np.sin)
    rho, g = monolithic_step(s, x0)
    out = s.step(x0)
    np.testing.assert_allclose(out.rho, rho, rtol=0, atol=1e-11)
    # the coupled oracle system carries eps^-2 entries; its rounding grows like 1/eps
    np.testing.assert_allclose(out.g, g, rtol=0, atol=1e-12 * np.abs(g).max() / eps)


def test_initial_data_scaling():
    cfg = RunConfig(builtin("DP1_A242"), 1e-2, 0.01, 0.1, n_x=16)
    wp = init_well_prepared(cfg, cos1)
    nwp = init_non_well_prepared(cfg, cos1)
    np.testing.assert_allclose(wp.g, 1e-4 * nwp.g)
    grid = cfg.velocity
    assert np.abs(grid.bracket(nwp.g)).max() < 1e-15
    np.testing.assert_allclose(nwp.rho, cos1(cfg.x_rho()))


def test_profile_array_and_shape_check():
    cfg = RunConfig(builtin("DP1_A242"), 1.0, 0.01, 0.1, n_x=8, staggered=True, central_order=2)
    s = init_non_well_prepared(cfg, np.arange(8.0))
    assert s.rho.shape == (8,) and s.g.shape == (8, 10)
    with pytest.raises(ConfigError):
        init_non_well_prepared(cfg, np.arange(7.0))


@pytest.mark.parametrize("kw", [
    dict(eps=0.0), dict(dt=-1.0), dict(n_x=3), dict(staggered=True), dict(drift=3.0, eps=0.5),
    dict(t_final=-1.0),
])
def test_config_errors(kw):
    base = dict(tableau=builtin("DP1_A242"), eps=1.0, dt=0.1, t_final=1.0)
    base.update(kw)
    with pytest.raises(ConfigError):
        RunConfig(**base)


def test_collision_grid_mismatch(grid):
    from apmm.velocity import VelocityGrid

    with pytest.raises(ConfigError):
        RunConfig(builtin("DP1_A242"), 1.0, 0.1, 1.0, velocity=grid, collision=col.bgk(VelocityGrid(4.0, 8)))


@pytest.mark.parametrize("staggered", [False, True])
@pytest.mark.parametrize("eps", [1.0, 1e-3])
def test_mass_and_bracket_conserved(staggered, eps):
    kw = dict(upwind_order=1, central_order=2, staggered=True) if staggered else {}
    cfg = RunConfig(builtin("ARS443"), eps, 0.01, 0.3, n_x=24, **kw)
    res = MicroMacroSolver(cfg).run(init_non_well_prepared(cfg, cos1), snapshot_every=3)
    assert np.ptp(res.mass) < 1e-10
    assert max(res.max_bracket) < 1e-9
    assert len(res.snapshots) == 11


def test_zero_final_time_returns_initial():
    cfg = RunConfig(builtin("DP1_A242"), 1.0, 0.1, 0.0, n_x=10)
    x0 = init_non_well_prepared(cfg, cos1)
    res = MicroMacroSolver(cfg).run(x0)
    assert len(res.snapshots) == 1
    np.testing.assert_array_equal(res.final.rho, x0.rho)


def test_constant_state_is_steady():
    cfg = RunConfig(builtin("DP2_A242"), 1e-3, 0.05, 0.5, n_x=10)
    res = MicroMacroSolver(cfg).run(init_non_well_prepared(cfg, lambda x: 2 + 0 * x))
    np.testing.assert_allclose(res.final.rho, 2.0, atol=1e-13)
    np.testing.assert_allclose(res.final.g, 0.0, atol=1e-13)


def test_step_history_and_stage_order():
    cfg = RunConfig(builtin("DP1_A242"), 1.0, 0.1, 0.1, n_x=10)
    s = MicroMacroSolver(cfg)
    hist = StageHistory()
    s.step(init_non_well_prepared(cfg, cos1), hist)
    assert len(hist) == cfg.tableau.s
    with pytest.raises(SolverError):
        s.stage_rho(2, StageHistory(), init_non_well_prepared(cfg, cos1))


def test_unstable_run_raises():
    cfg = RunConfig(builtin("ARS443"), 1e-2, 1e-3, 0.2, n_x=120)
    with pytest.raises(SolverError, match="blew up"):
        MicroMacroSolver(cfg).run(init_non_well_prepared(cfg, cos1))


def test_uneven_final_time_warns():
    cfg = RunConfig(builtin("DP1_A242"), 1.0, 0.03, 0.1, n_x=10)
    with pytest.warns(UserWarning):
        MicroMacroSolver(cfg).run(init_non_well_prepared(cfg, cos1))


def test_solve_wrapper_is_deterministic():
    cfg = RunConfig(builtin("DP1_A242"), 1e-2, 0.01, 0.1, n_x=16)
    a = solve(cfg).final
    b = solve(cfg).final
    np.testing.assert_array_equal(a.rho, b.rho)
    np.testing.assert_array_equal(a.g, b.g)


@settings(max_examples=15, deadline=None)
@given(hs.sampled_from(builtin_names()), hs.floats(-6, 0), hs.integers(1, 4))
def test_random_fourier_data_conserve_mass(name, log_eps, k):
    cfg = RunConfig(builtin(name), 10.0**log_eps, 0.01, 0.05, n_x=16)
    x0 = init_non_well_prepared(cfg, lambda x: 1 + 0.5 * np.sin(k * x))
    res = MicroMacroSolver(cfg).run(x0)
    assert abs(res.mass[-1] - res.mass[0]) < 1e-11
    assert np.abs(cfg.velocity.bracket(res.final.g)).max() < 1e-10
