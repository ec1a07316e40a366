"""IMEX Runge-Kutta micro-macro solver on a periodic 1D domain.

The unknowns are the density ``rho`` on the nodes ``x_i = i dx`` and the
micro part ``g`` on either the same nodes (colocated grid) or the
half-points ``x_{i+1/2}`` (staggered grid).  Each stage first solves an
elliptic problem for ``rho^(j)`` and then updates ``g^(j)`` explicitly
through the stage resolvent.  An optional drift coefficient ``A`` adds the
explicitly treated source ``v M A rho / eps`` of the advection-diffusion
collision operator; with ``A = 0`` the extra terms vanish identically.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from apmm import collision as col
from apmm import stencils as st
from apmm.tableau import DoubleButcherTableau, is_gsa
from apmm.velocity import VelocityGrid

__all__ = [
    "ConfigError",
    "SolverError",
    "check_growth",
    "RunConfig",
    "MicroMacroState",
    "StageHistory",
    "MicroMacroSolver",
    "RunResult",
    "init_well_prepared",
    "init_non_well_prepared",
    "norm_l2",
    "norm_linf",
]

log = logging.getLogger(__name__)

BRACKET_TOL = 1e-10
# growth factor over the initial amplitude treated as an instability
GROWTH_LIMIT = 1e6


class ConfigError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class RunConfig:
    tableau: DoubleButcherTableau
    eps: float
    dt: float
    t_final: float
    n_x: int = 50
    length: float = 2 * math.pi
    upwind_order: int = 3
    central_order: int = 4
    staggered: bool = False
    velocity: VelocityGrid | None = None
    collision: col.CollisionOperator | None = None
    drift: float = 0.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ConfigError(f"t_final must be non-negative, got {self.t_final}")
        if self.n_x < 5:
            raise ConfigError(f"n_x must be at least 5, got {self.n_x}")
        if not self.length > 0:
            raise ConfigError(f"length must be positive, got {self.length}")
        if self.staggered and self.central_order != 2:
            raise ConfigError("the staggered grid uses the two-point central stencils (order 2)")
        if abs(self.eps * self.drift) >= 1:
            raise ConfigError(f"|eps A| must be < 1, got {abs(self.eps * self.drift)}")
        if not is_gsa(self.tableau):
            raise ConfigError(f"tableau {self.tableau.name} is not globally stiffly accurate")
        if self.velocity is None:
            object.__setattr__(self, "velocity", VelocityGrid(5.0, 10))
        if self.collision is None:
            object.__setattr__(self, "collision", col.bgk(self.velocity))
        elif self.collision.grid is not self.velocity:
            raise ConfigError("collision operator was built on a different velocity grid")

    @property
    def dx(self) -> float:
        return self.length / self.n_x

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def x_rho(self) -> np.ndarray:
        return np.arange(self.n_x) * self.dx

    def x_g(self) -> np.ndarray:
        shift = 0.5 if self.staggered else 0.0
        return (np.arange(self.n_x) + shift) * self.dx


@dataclass
class MicroMacroState:
    rho: np.ndarray
    g: np.ndarray
    time: float = 0.0

    def copy(self) -> "MicroMacroState":
        return MicroMacroState(self.rho.copy(), self.g.copy(), self.time)


def _sample(profile, x_rho, x_g, staggered):
    if callable(profile):
        return np.asarray(profile(x_rho), float), np.asarray(profile(x_g), float)
    rho = np.asarray(profile, dtype=float)
    if rho.shape != x_rho.shape:
        raise ConfigError(f"profile has {rho.size} samples, grid has {x_rho.size} nodes")
    return rho, (st.average(True).apply(rho) if staggered else rho.copy())


def _initial_state(config: RunConfig, profile, scale: float) -> MicroMacroState:
    grid = config.velocity
    rho, rho_g = _sample(profile, config.x_rho(), config.x_g(), config.staggered)
    micro = grid.v**2 * grid.M
    micro = micro - grid.bracket(micro) * grid.M
    return MicroMacroState(rho, scale * np.multiply.outer(rho_g, micro))


def init_well_prepared(config: RunConfig, profile) -> MicroMacroState:
    """``g = eps^2 (I - Pi)(v^2 M) rho0``; ``profile`` is a callable or nodal samples."""
    return _initial_state(config, profile, config.eps**2)


def init_non_well_prepared(config: RunConfig, profile) -> MicroMacroState:
    """``g = (I - Pi)(v^2 M) rho0``, an O(1) micro part."""
    return _initial_state(config, profile, 1.0)


def norm_l2(u, dx: float) -> float:
    return float(math.sqrt(dx * np.sum(np.asarray(u) ** 2)))


def norm_linf(u) -> float:
    return float(np.max(np.abs(u)))


@dataclass
class StageHistory:
    """Stage values and the derived quantities reused by later stages."""

    rho: list = field(default_factory=list)
    g: list = field(default_factory=list)
    grad: list = field(default_factory=list)  # G_cen_g rho^(k)
    avg: list = field(default_factory=list)  # rho^(k) on the micro grid
    transport: list = field(default_factory=list)  # T g^(k)
    collided: list = field(default_factory=list)  # L g^(k)
    flux: list = field(default_factory=list)  # <v g^(k)>

    def __len__(self):
        return len(self.rho)


@dataclass
class _StageOps:
    a: float
    resolvent: np.ndarray  # range-restricted (eps^2 - a dt L)^-1
    diffusion: float
    lu: tuple
    flux_weights: np.ndarray  # R^T (v * weights)
    r_vm: np.ndarray  # R (v M)


@dataclass
class RunResult:
    final: MicroMacroState
    times: list
    snapshots: list
    mass: list
    max_bracket: list


class MicroMacroSolver:
    """Stage-by-stage solver; :meth:`run` hands the time loop to a kernel."""

    def __init__(self, config: RunConfig):
        self.config = c = config
        grid = c.velocity
        dx = c.dx
        self.upw_minus, self.upw_plus = st.upwind_pair(c.upwind_order, dx)
        if c.staggered:
            self.cen_g = st.central(2, "g", dx)
            self.cen_rho = st.central(2, "rho", dx)
        else:
            self.cen_g = self.cen_rho = st.central(c.central_order, "colocated", dx)
        self.avg = st.average(c.staggered)
        self.vw = grid.v * grid.weights
        self._laplacian = self.cen_rho.matrix(c.n_x) @ self.cen_g.matrix(c.n_x)
        self._ops: dict[float, _StageOps] = {}
        self.stage_ops = [self._ops_for(a) for a in c.tableau.diagonal]

    def _ops_for(self, a: float) -> _StageOps:
        if a in self._ops:
            return self._ops[a]
        c = self.config
        grid = c.velocity
        r = col.stage_resolvent(c.collision, c.eps, a * c.dt).range
        diff = float(grid.bracket(grid.v * (r @ grid.vM)))
        system = np.eye(c.n_x) - (a * c.dt) ** 2 * diff * self._laplacian
        ops = _StageOps(a, r, diff, lu_factor(system), r.T @ self.vw, r @ grid.vM)
        self._ops[a] = ops
        return ops

    # --- operators --------------------------------------------------------
    def transport_term(self, g):
        """``(I - Pi)(v+ G- + v- G+) g`` on the micro grid."""
        grid = self.config.velocity
        t = grid.v_plus * self.upw_minus.apply(g) + grid.v_minus * self.upw_plus.apply(g)
        return t - np.multiply.outer(grid.bracket(t), grid.M)

    def _record(self, hist: StageHistory, rho, g):
        c = self.config
        hist.rho.append(rho)
        hist.g.append(g)
        hist.grad.append(self.cen_g.apply(rho))
        hist.avg.append(self.avg.apply(rho))
        hist.transport.append(self.transport_term(g))
        hist.collided.append(c.collision.apply(g))
        hist.flux.append(g @ self.vw)

    def stage_source(self, j: int, hist: StageHistory, g_n):
        """Zero-mean bracket content ``Y`` shared by the stage-``j`` updates."""
        c = self.config
        grid = c.velocity
        ae, ai = c.tableau.a_explicit, c.tableau.a_implicit
        y = c.eps * g_n
        drift = np.zeros(c.n_x)
        grad = np.zeros(c.n_x)
        for k in range(j):
            y = y - c.dt * ae[j, k] * hist.transport[k] + (c.dt / c.eps) * ai[j, k] * hist.collided[k]
            grad = grad + ai[j, k] * hist.grad[k]
            drift = drift + ae[j, k] * hist.avg[k]
        return y + np.multiply.outer(c.dt * (c.drift * drift - grad), grid.vM)

    def stage_rho(self, j: int, hist: StageHistory, state: MicroMacroState, y=None):
        """Elliptic solve for ``rho^(j)`` (0-based stage index)."""
        if len(hist) != j:
            raise SolverError(f"stage {j} needs {j} previous stages, got {len(hist)}")
        c = self.config
        ops = self.stage_ops[j]
        if y is None:
            y = self.stage_source(j, hist, state.g)
        ai = c.tableau.a_implicit
        q = ops.a * c.dt * (y @ ops.flux_weights)
        for k in range(j):
            q = q + ai[j, k] * (c.dt / c.eps) * hist.flux[k]
        rhs = state.rho - self.cen_rho.apply(q)
        rho = lu_solve(ops.lu, rhs)
        if not np.all(np.isfinite(rho)):
            raise SolverError(f"non-finite density in stage {j + 1}")
        return rho

    def stage_g(self, j: int, hist: StageHistory, rho_j, state: MicroMacroState, y=None):
        """Micro update ``g^(j)`` given the stage density."""
        c = self.config
        ops = self.stage_ops[j]
        if y is None:
            y = self.stage_source(j, hist, state.g)
        grad = self.cen_g.apply(rho_j)
        return c.eps * (y @ ops.resolvent.T) - np.multiply.outer(
            c.eps * c.dt * ops.a * grad, ops.r_vm
        )

    def step(self, state: MicroMacroState, history: StageHistory | None = None):
        """One time step through the stage methods; fills ``history`` if given."""
        hist = StageHistory() if history is None else history
        for j in range(self.config.tableau.s):
            y = self.stage_source(j, hist, state.g)
            rho = self.stage_rho(j, hist, state, y)
            g = self.stage_g(j, hist, rho, state, y)
            self._record(hist, rho, g)
        return MicroMacroState(hist.rho[-1], hist.g[-1], state.time + self.config.dt)

    # --- time loop ----------------------------------------------------------
    def kernel_args(self) -> dict:
        c = self.config
        grid = c.velocity
        t = c.tableau

        def sten(s: st.Stencil):
            return np.asarray(s.offsets, dtype=np.intp), np.ascontiguousarray(s.weights())

        ops = self.stage_ops
        return dict(
            eps=float(c.eps),
            dt=float(c.dt),
            drift=float(c.drift),
            a_exp=np.ascontiguousarray(t.a_explicit),
            a_imp=np.ascontiguousarray(t.a_implicit),
            res=np.ascontiguousarray([o.resolvent for o in ops]),
            lu=np.ascontiguousarray([o.lu[0] for o in ops]),
            piv=np.ascontiguousarray([o.lu[1] for o in ops], dtype=np.intp),
            flux_w=np.ascontiguousarray([o.flux_weights for o in ops]),
            r_vm=np.ascontiguousarray([o.r_vm for o in ops]),
            lmat=np.ascontiguousarray(c.collision.matrix),
            v=np.ascontiguousarray(grid.v),
            weights=np.ascontiguousarray(grid.weights),
            m=np.ascontiguousarray(grid.M),
            upw_minus=sten(self.upw_minus),
            upw_plus=sten(self.upw_plus),
            cen_rho=sten(self.cen_rho),
            cen_g=sten(self.cen_g),
            avg=sten(self.avg),
        )

    def run(self, state: MicroMacroState, snapshot_every: int | None = None, backend=None):
        """Advance to ``t_final`` with the selected kernel backend."""
        from apmm import kernels

        c = self.config
        n = c.n_steps
        if not math.isclose(n * c.dt, c.t_final, rel_tol=1e-9, abs_tol=1e-12):
            warnings.warn(
                f"t_final={c.t_final} is not a multiple of dt={c.dt}; using {n * c.dt}",
                stacklevel=2,
            )
        run_periodic = kernels.get_backend(backend).run_periodic
        args = self.kernel_args()
        every = n if not snapshot_every else snapshot_every
        grid = c.velocity
        cur = state.copy()
        res = RunResult(cur, [], [], [], [])

        def snap(s):
            res.times.append(s.time)
            res.snapshots.append(s.copy())
            res.mass.append(float(np.sum(s.rho) * c.dx))
            res.max_bracket.append(float(np.max(np.abs(grid.bracket(s.g)))))

        snap(cur)
        scale = max(1.0, float(np.abs(cur.rho).max()), float(np.abs(cur.g).max()))
        done = 0
        while done < n:
            chunk = min(every, n - done) if every else n - done
            rho, g = run_periodic(cur.rho, cur.g, chunk, **args)
            done += chunk
            cur = MicroMacroState(rho, g, state.time + done * c.dt)
            check_growth(cur.time, scale, rho, g)
            snap(cur)
        res.final = cur
        if res.max_bracket[-1] > BRACKET_TOL * max(1.0, np.abs(cur.g).max()):
            log.warning("micro part drifted off the zero-mean subspace: %g", res.max_bracket[-1])
        return res


def check_growth(time: float, scale: float, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)) or np.abs(a).max() > GROWTH_LIMIT * scale:
            raise SolverError(f"solution blew up before t={time:g}; reduce dt or refine the grid")


def solve(config: RunConfig, init: Callable | None = None, profile=None, backend=None):
    """Convenience wrapper: build the solver, initialize and run."""
    profile = (lambda x: 1 + np.cos(x)) if profile is None else profile
    init = init_non_well_prepared if init is None else init
    solver = MicroMacroSolver(config)
    return solver.run(init(config, profile), backend=backend)
