import numpy as np
import pytest

from apmm import collision as col
from apmm.advdiff import (
    DEFAULT_DRIFT,
    AdvDiffSolver,
    DriftConfig,
    run_advdiff,
    step_advdiff,
    with_drift,
)
from apmm.periodic import ConfigError, RunConfig, init_non_well_prepared, init_well_prepared
from apmm.tableau import builtin


def _cfg(eps=1e-4, dt=0.005, t=0.5, n_x=40, name="DP1_A242"):
    return RunConfig(builtin(name), eps, dt, t, n_x=n_x, upwind_order=1, central_order=2,
                     staggered=True)


def test_drift_speed_is_kappa_A():
    s = AdvDiffSolver(with_drift(_cfg(), 0.5))
    assert s.drift_velocity() == pytest.approx(0.5 * col.kappa(s.config.collision))


def test_drift_bound():
    with pytest.raises(ConfigError):
        DriftConfig(2.0).check(0.6)
    with pytest.raises(ConfigError):
        with_drift(_cfg(eps=1.0), 1.5)
    assert with_drift(_cfg(), DriftConfig(0.25)).drift == 0.25
    assert DEFAULT_DRIFT == 0.5


@pytest.mark.parametrize("n_x,tol", [(40, 2e-3), (80, 5e-4)])
def test_limit_regime_tracks_exact_advection_diffusion(n_x, tol):
    # rho_t = kappa rho_xx - kappa A rho_x with rho_0 = sin
    cfg = _cfg(n_x=n_x)
    rho = run_advdiff(cfg, 0.5, init=init_well_prepared).final.rho
    k = col.kappa(cfg.collision)
    x = cfg.x_rho()
    exact = np.exp(-k * 0.5) * np.sin(x - 0.5 * k * 0.5)
    assert np.abs(rho - exact).max() < tol


def test_zero_drift_reduces_to_diffusion_solver():
    from apmm.periodic import MicroMacroSolver

    cfg = _cfg(eps=1e-2, t=0.05)
    x0 = init_non_well_prepared(cfg, np.sin)
    a = step_advdiff(AdvDiffSolver(with_drift(cfg, 0.0)), x0)
    b = MicroMacroSolver(cfg).step(x0)
    np.testing.assert_array_equal(a.rho, b.rho)


def test_mass_conserved_with_drift():
    res = run_advdiff(_cfg(eps=0.5, dt=0.01, t=0.3), 0.5, profile=lambda x: 1 + np.sin(x))
    assert np.ptp(res.mass) < 1e-12
