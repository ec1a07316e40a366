"""Experiment drivers shared by the command line and the acceptance checks."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from apmm import collision as col
from apmm import reference as ref
from apmm import stencils as st
from apmm.analysis import ConvergenceStudy, error
from apmm.config import ExperimentConfig
from apmm.inflow import InflowBoundaryData, InflowConfig, InflowSolver
from apmm.periodic import (
    ConfigError,
    MicroMacroSolver,
    RunConfig,
    init_non_well_prepared,
    init_well_prepared,
)
from apmm.tableau import builtin
from apmm.velocity import VelocityGrid

__all__ = [
    "PROFILES",
    "velocity_grid",
    "periodic_config",
    "inflow_config",
    "boundary_data",
    "run_model",
    "final_density",
    "time_study",
    "space_study",
    "compare_models",
    "sweep",
]

PROFILES = {
    "cos": lambda x: 1.0 + np.cos(x),
    "sin": np.sin,
    "zero": np.zeros_like,
}

# the explicit-transport kinetic solver is only meaningful away from the limit
BGK_MIN_EPS = 0.1


def velocity_grid(cfg: ExperimentConfig) -> VelocityGrid:
    return VelocityGrid.from_spacing(cfg.v_max, cfg.dv)


def _profile(cfg: ExperimentConfig, x_rho):
    if cfg.profile in PROFILES:
        return PROFILES[cfg.profile]
    values = np.loadtxt(cfg.profile, dtype=float, ndmin=1)
    if values.shape != np.shape(x_rho):
        raise ConfigError(f"profile file has {values.size} values, grid has {len(x_rho)} nodes")
    return values


def periodic_config(cfg: ExperimentConfig, tableau: str, eps: float, dt: float, n_x: int,
                    t_final: float | None = None, grid: VelocityGrid | None = None) -> RunConfig:
    drift = cfg.drift if cfg.model in ("advdiff", "advdiff-limit") else 0.0
    return RunConfig(
        builtin(tableau), eps, dt, cfg.t_final if t_final is None else t_final, n_x, cfg.length,
        cfg.upwind_order, cfg.central_order, cfg.staggered, grid or velocity_grid(cfg), None, drift,
    )


def boundary_data(cfg: ExperimentConfig, grid: VelocityGrid) -> InflowBoundaryData:
    if cfg.boundary == "equilibrium":
        return InflowBoundaryData.equilibrium(grid, cfg.boundary_value)
    if cfg.boundary == "scaled-velocity":
        return InflowBoundaryData.scaled_velocity(grid, cfg.boundary_value)
    values = np.loadtxt(cfg.boundary_file, dtype=float, ndmin=1)
    return InflowBoundaryData.custom(grid, values)


def inflow_config(cfg: ExperimentConfig, tableau: str, eps: float, dt: float, n_x: int,
                  t_final: float | None = None, grid: VelocityGrid | None = None) -> InflowConfig:
    grid = grid or velocity_grid(cfg)
    return InflowConfig(
        builtin(tableau), eps, dt, cfg.t_final if t_final is None else t_final, n_x, cfg.length,
        grid, None, boundary_data(cfg, grid),
    )


def _init(cfg: ExperimentConfig, rc: RunConfig):
    fn = init_well_prepared if cfg.init == "WP" else init_non_well_prepared
    return fn(rc, _profile(cfg, rc.x_rho()))


def _march(step, state, n_steps, every, extract, dt=0.0):
    snaps = [(0.0, extract(state))]
    for i in range(1, n_steps + 1):
        state = step(state)
        if (every and i % every == 0) or i == n_steps:
            snaps.append((i * dt, extract(state)))
    return snaps


def _kappa(grid: VelocityGrid) -> float:
    return col.kappa(col.bgk(grid))


def _diffusion_wall(cfg: ExperimentConfig, grid: VelocityGrid) -> float:
    bd = boundary_data(cfg, grid)
    if cfg.boundary == "equilibrium":
        return bd.rho_left
    return ref.klar_boundary_rho(bd.f_left, grid, _kappa(grid))


def run_model(cfg: ExperimentConfig, tableau: str, eps: float, dt: float, n_x: int,
              model: str | None = None, snapshot_every: int | None = None):
    """Run one model; returns the density grid and ``[(t, rho), ...]``."""
    model = model or cfg.model
    every = cfg.snapshot_every if snapshot_every is None else snapshot_every
    grid = velocity_grid(cfg)
    n_steps = int(round(cfg.t_final / dt))
    if model in ("micromacro", "advdiff"):
        rc = periodic_config(replace(cfg, model=model), tableau, eps, dt, n_x, grid=grid)
        res = MicroMacroSolver(rc).run(_init(cfg, rc), every, backend=cfg.backend)
        return rc.x_rho(), [(s.time, s.rho) for s in res.snapshots]
    if model == "inflow":
        ic = inflow_config(cfg, tableau, eps, dt, n_x, grid=grid)
        res = InflowSolver(ic).run(snapshot_every=every)
        return ic.x_interior(), [(s.time, s.rho) for s in res.snapshots]
    t = builtin(tableau)
    if cfg.geometry == "periodic":
        # kinetic and limit models live on the nodes only
        nodal = replace(cfg, model="micromacro", staggered=False, central_order=4)
        rc = periodic_config(nodal, tableau, eps, dt, n_x, grid=grid)
        x = rc.x_rho()
        state = _init(nodal, rc)
        if model == "bgk":
            solver = ref.BGKSolver(t, eps, dt, n_x, cfg.length, cfg.upwind_order, grid=grid)
            f0 = ref.KineticState(np.multiply.outer(state.rho, grid.M) + state.g)
            return x, _march(solver.step, f0, n_steps, every, lambda s: s.density(grid), dt=dt)
        lap = ref.periodic_laplacian(n_x, cfg.length, cfg.staggered, cfg.central_order)
        k = _kappa(grid)
        if model == "diffusion":
            step = lambda r: ref.diffusion_implicit_step(r, dt, t, k, lap)
        else:
            dx = cfg.length / n_x
            if cfg.staggered:
                gradient = st.central(2, "rho", dx).matrix(n_x) @ st.average(True).matrix(n_x)
            else:
                gradient = st.central(cfg.central_order, "colocated", dx).matrix(n_x)
            step = lambda r: ref.advdiff_limit_step(r, dt, t, k, cfg.drift, lap, gradient)
        return x, _march(step, state.rho, n_steps, every, np.copy, dt=dt)
    # bounded geometry
    ic = inflow_config(cfg, tableau, eps, dt, n_x, grid=grid)
    x = ic.x_interior()
    if model == "bgk":
        bd = ic.boundary
        solver = ref.BGKInflowSolver(t, eps, dt, n_x, bd.f_left, bd.f_right, cfg.length, grid=grid)
        f0 = ref.KineticState(np.zeros((n_x - 2, grid.n_v)))
        return x, _march(solver.step, f0, n_steps, every, lambda s: s.density(grid), dt=dt)
    if model == "diffusion":
        lap, src = ref.dirichlet_laplacian(n_x, cfg.length, _diffusion_wall(cfg, grid),
                                           ic.boundary.rho_right)
        k = _kappa(grid)
        step = lambda r: ref.diffusion_implicit_step(r, dt, t, k, lap, src)
        return x, _march(step, np.zeros(n_x - 2), n_steps, every, np.copy, dt=dt)
    raise ConfigError(f"model {model} is not available on the inflow geometry")


def final_density(cfg, tableau, eps, dt, n_x, model=None):
    x, snaps = run_model(cfg, tableau, eps, dt, n_x, model=model, snapshot_every=0)
    return x, snaps[-1][1]


def time_study(cfg: ExperimentConfig, tableau: str, eps: float) -> ConvergenceStudy:
    """Errors at ``t_final`` for every step in ``cfg.dt`` against a fine reference."""
    n_x = cfg.n_x[0]
    ref_model = "diffusion" if cfg.reference == "diffusion" else None
    x, rho_ref = final_density(cfg, tableau, eps, cfg.reference_dt, n_x, model=ref_model)
    dx = cfg.length / (n_x if cfg.geometry == "periodic" else n_x - 1)
    l2, linf = [], []
    for dt in cfg.dt:
        _, rho = final_density(cfg, tableau, eps, dt, n_x)
        l2.append(error(rho, rho_ref, "L2", dx))
        linf.append(error(rho, rho_ref, "Linf"))
    label = f"{cfg.reference} dt={cfg.reference_dt:g}"
    return ConvergenceStudy(tableau, eps, "dt", list(cfg.dt), l2, linf, label)


def space_study(cfg: ExperimentConfig, tableau: str, eps: float) -> ConvergenceStudy:
    """Errors for every ``n_x`` against the nested reference grid."""
    if cfg.geometry != "periodic":
        raise ConfigError("space studies run on the periodic geometry")
    dt = cfg.dt[0]
    n_ref = cfg.reference_n_x
    for n in cfg.n_x:
        if n_ref % n:
            raise ConfigError(f"n_x={n} does not divide the reference grid n_x={n_ref}")
    _, rho_ref = final_density(cfg, tableau, eps, dt, n_ref)
    l2, linf = [], []
    for n in cfg.n_x:
        _, rho = final_density(cfg, tableau, eps, dt, n)
        sub = rho_ref[:: n_ref // n]
        l2.append(error(rho, sub, "L2", cfg.length / n))
        linf.append(error(rho, sub, "Linf"))
    return ConvergenceStudy(tableau, eps, "n_x", list(cfg.n_x), l2, linf, f"n_x={n_ref}")


def compare_models(cfg: ExperimentConfig, tableau: str, eps: float, dt: float, n_x: int) -> dict:
    """Final profiles of the micro-macro, kinetic and limit models on one scenario."""
    mm = "inflow" if cfg.geometry == "inflow" else ("advdiff" if cfg.model == "advdiff" else "micromacro")
    limit = "advdiff-limit" if mm == "advdiff" else "diffusion"
    models = [mm, limit]
    if eps >= BGK_MIN_EPS and mm != "advdiff":
        models.insert(1, "bgk")
    out = {}
    for m in models:
        out[m] = final_density(cfg, tableau, eps, dt, n_x, model=m)
    return out


def _call(task):
    fn, args = task
    return fn(*args)


def sweep(fn, arg_list, workers: int = 1, key=None) -> list:
    """Apply ``fn`` to every argument tuple; results come back sorted by ``key(args)``."""
    key = key or (lambda a: tuple(str(v) for v in a))
    keyed = sorted(arg_list, key=key)
    tasks = [(fn, a) for a in keyed]
    if workers <= 1 or len(tasks) <= 1:
        return [_call(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, tasks))
