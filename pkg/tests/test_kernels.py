import numpy as np
import pytest

from apmm import kernels
from apmm.periodic import MicroMacroSolver, RunConfig, init_non_well_prepared
from apmm.tableau import builtin, builtin_names


def test_python_backend_always_available():
    assert "python" in kernels.available_backends()
    assert kernels.get_backend("python").run_periodic is not None
    assert kernels.default_backend in kernels.available_backends()


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


needs_compiled = pytest.mark.skipif(
    "compiled" not in kernels.available_backends(), reason="extension not built"
)


@needs_compiled
@pytest.mark.parametrize("name", builtin_names())
@pytest.mark.parametrize("staggered", [False, True])
def test_backends_agree(name, staggered):
    kw = dict(upwind_order=1, central_order=2, staggered=True, drift=0.5) if staggered else {}
    cfg = RunConfig(builtin(name), 1e-2, 0.005, 0.1, n_x=20, **kw)
    x0 = init_non_well_prepared(cfg, lambda x: 1 + np.sin(x))
    s = MicroMacroSolver(cfg)
    a = s.run(x0, backend="compiled").final
    b = s.run(x0, backend="python").final
    np.testing.assert_allclose(a.rho, b.rho, rtol=0, atol=1e-13)
    np.testing.assert_allclose(a.g, b.g, rtol=0, atol=1e-13)


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_kernel_matches_stage_methods(backend):
    cfg = RunConfig(builtin("DP1_A242"), 1e-3, 0.01, 0.05, n_x=16)
    s = MicroMacroSolver(cfg)
    x0 = init_non_well_prepared(cfg, lambda x: 1 + np.cos(x))
    ref = x0
    for _ in range(cfg.n_steps):
        ref = s.step(ref)
    out = s.run(x0, backend=backend).final
    np.testing.assert_allclose(out.rho, ref.rho, rtol=0, atol=1e-13)
    np.testing.assert_allclose(out.g, ref.g, rtol=0, atol=1e-13)
