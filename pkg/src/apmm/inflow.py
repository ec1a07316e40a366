"""Half-moment micro-macro solver on ``[0, length]`` with inflow boundaries.

The kinetic unknown is split as ``f = rho_bar M + g_bar`` with
``<g_bar>_{V-} = 0``, where ``V-`` = {v > 0} is the incoming half set at
the left wall.  ``rho_bar`` and the full density ``rho`` live on the
interior nodes ``x_1 .. x_{n_x-2}``; ``g_bar`` lives on the half-points
``x_{1/2} .. x_{n_x-3/2}`` and is closed by one ghost half-point per side
built from the boundary data.

The macro unknown is advanced through the conservative equation for
``rho`` and translated back with ``rho = rho_bar + B_avg <g_bar>``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from apmm import collision as col
from apmm import stencils as st
from apmm.periodic import ConfigError, SolverError, check_growth, norm_l2
from apmm.tableau import DoubleButcherTableau, is_gsa
from apmm.velocity import VelocityGrid

__all__ = [
    "InflowBoundaryData",
    "InflowConfig",
    "InflowState",
    "BoundaryOperators",
    "InflowSolver",
    "InflowResult",
    "assemble_boundary_operators",
    "nonequilibrium_ghost",
    "step_inflow_first_order",
    "limit_operator",
    "inflow_limit_step",
    "solve_inflow",
]

log = logging.getLogger(__name__)

GHOST_MODES = ("direct", "mirror")


def nonequilibrium_ghost(f_b, rho_b: float, g_first, M):
    """Ghost micro value whose average with ``g_first`` is ``f_b - rho_b M``."""
    return 2.0 * (np.asarray(f_b) - rho_b * np.asarray(M)) - np.asarray(g_first)


@dataclass(frozen=True, eq=False)
class InflowBoundaryData:
    """Distributions prescribed at the two walls.

    Only the incoming components matter: ``v > 0`` at the left wall and
    ``v < 0`` at the right one.  ``ghost_*`` selects how the ghost micro
    value is built: ``direct`` uses ``f_b - rho_b M``; ``mirror`` places that
    value at the wall itself by reflecting the first interior half-cell.
    """

    grid: VelocityGrid
    f_left: np.ndarray
    f_right: np.ndarray
    ghost_left: str = "direct"
    ghost_right: str = "direct"
    kind: str = "custom"

    def __post_init__(self):
        n = self.grid.n_v
        for name in ("f_left", "f_right"):
            val = np.array(getattr(self, name), dtype=float)
            if val.shape != (n,):
                raise ConfigError(f"{name} must have {n} velocity values, got shape {val.shape}")
            if not np.all(np.isfinite(val)):
                raise ConfigError(f"{name} contains non-finite values")
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        for side in (self.ghost_left, self.ghost_right):
            if side not in GHOST_MODES:
                raise ConfigError(f"ghost mode must be one of {GHOST_MODES}, got {side!r}")

    @classmethod
    def equilibrium(cls, grid: VelocityGrid, left: float = 1.0, right: float = 0.0):
        return cls(grid, left * grid.M, right * grid.M, kind="equilibrium")

    @classmethod
    def scaled_velocity(cls, grid: VelocityGrid, scale: float = 1.0, right: float = 0.0):
        """``f_b = scale * v M`` on the incoming velocities of the left wall."""
        f = np.where(grid.v > 0, scale * grid.vM, 0.0)
        return cls(grid, f, right * grid.M, "mirror", "direct", kind="scaled-velocity")

    @classmethod
    def custom(cls, grid: VelocityGrid, left, right=None, ghost_left="mirror"):
        right = np.zeros(grid.n_v) if right is None else right
        return cls(grid, left, right, ghost_left, "direct", kind="custom")

    @property
    def rho_left(self) -> float:
        return float(self.grid.half_bracket(self.f_left))

    @property
    def rho_right(self) -> float:
        return float(self.grid.half_bracket(self.f_right))

    @property
    def g_left(self) -> np.ndarray:
        return self.f_left - self.rho_left * self.grid.M

    @property
    def g_right(self) -> np.ndarray:
        return self.f_right - self.rho_right * self.grid.M

    def ghosts(self, g_bar):
        """Ghost rows for a micro field of shape ``(n_x - 1, n_v)``."""
        gl, gr = self.g_left, self.g_right
        left = nonequilibrium_ghost(self.f_left, self.rho_left, g_bar[0], self.grid.M) if (
            self.ghost_left == "mirror") else gl
        right = nonequilibrium_ghost(self.f_right, self.rho_right, g_bar[-1], self.grid.M) if (
            self.ghost_right == "mirror") else gr
        return left, right

    def close(self, g_bar):
        left, right = self.ghosts(g_bar)
        return np.vstack([left, g_bar, right])


@dataclass(frozen=True, eq=False)
class InflowConfig:
    tableau: DoubleButcherTableau
    eps: float
    dt: float
    t_final: float
    n_x: int = 20
    length: float = 2.0
    velocity: VelocityGrid | None = None
    collision: col.CollisionOperator | None = None
    boundary: InflowBoundaryData | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ConfigError(f"t_final must be non-negative, got {self.t_final}")
        if self.n_x < 4:
            raise ConfigError(f"n_x must be at least 4, got {self.n_x}")
        if not self.length > 0:
            raise ConfigError(f"length must be positive, got {self.length}")
        if not is_gsa(self.tableau):
            raise ConfigError(f"tableau {self.tableau.name} is not globally stiffly accurate")
        if self.velocity is None:
            object.__setattr__(self, "velocity", VelocityGrid(5.0, 10))
        if self.collision is None:
            object.__setattr__(self, "collision", col.bgk(self.velocity))
        elif self.collision.grid is not self.velocity:
            raise ConfigError("collision operator was built on a different velocity grid")
        if self.boundary is None:
            object.__setattr__(self, "boundary", InflowBoundaryData.equilibrium(self.velocity))
        elif self.boundary.grid is not self.velocity:
            raise ConfigError("boundary data was built on a different velocity grid")

    @property
    def dx(self) -> float:
        return self.length / (self.n_x - 1)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def x_interior(self) -> np.ndarray:
        return np.arange(1, self.n_x - 1) * self.dx

    def x_half(self) -> np.ndarray:
        return (np.arange(self.n_x - 1) + 0.5) * self.dx


@dataclass
class InflowState:
    rho: np.ndarray
    rho_bar: np.ndarray
    g_bar: np.ndarray
    g_bar_closed: np.ndarray
    time: float = 0.0

    def copy(self) -> "InflowState":
        return InflowState(
            self.rho.copy(), self.rho_bar.copy(), self.g_bar.copy(), self.g_bar_closed.copy(), self.time
        )


@dataclass(frozen=True, eq=False)
class BoundaryOperators:
    """Velocity-space operators of one implicit weight ``a``.

    ``resolvent`` is ``(eps^2 I - a dt L~)^-1`` on functions with zero
    incoming half-bracket; ``D`` and ``E`` are the scalar brackets
    ``<v I dt J>`` and ``<I dt J>`` over the full velocity set.
    """

    a: float
    resolvent: np.ndarray
    J: np.ndarray
    IJ: np.ndarray
    D: float
    E: float


def assemble_boundary_operators(L: col.CollisionOperator, eps: float, dt: float, a: float = 1.0):
    grid = L.grid
    res = col.half_resolvent(L, eps, a * dt).range
    J = grid.vM - grid.half_bracket(grid.vM) * grid.M
    IJ = res @ J
    D = float(grid.bracket(grid.v * dt * IJ))
    E = float(grid.bracket(dt * IJ))
    return BoundaryOperators(a, res, J, IJ, D, E)


def limit_operator(L: col.CollisionOperator) -> float:
    """Scalar ``<v L~^-1 J>``; equals ``-kappa`` on the discrete grid."""
    grid = L.grid
    inv = col.half_resolvent(L, 0.0, 1.0).range
    J = grid.vM - grid.half_bracket(grid.vM) * grid.M
    return float(grid.bracket(grid.v * (-(inv @ J))))


def _transport(grid: VelocityGrid, m: st.BoundaryMatrices, g_closed):
    """``(I - Pi^-)(v+ B- + v- B+) g_cl`` on the half-points."""
    t = grid.v_plus * (m.upw_minus @ g_closed) + grid.v_minus * (m.upw_plus @ g_closed)
    return t - np.multiply.outer(grid.half_bracket(t), grid.M)


@dataclass
class InflowResult:
    final: InflowState
    times: list
    snapshots: list


class InflowSolver:
    def __init__(self, config: InflowConfig):
        self.config = c = config
        self.mats = st.boundary_matrices(c.n_x, c.dx)
        b = c.boundary
        self.rho_bd = st.boundary_rho_vector(b.rho_left, b.rho_right, c.dx, c.n_x)
        m = self.mats
        self._avg_g = m.avg @ m.cen_g
        self._lap = m.cen_rho @ m.cen_g
        self._ops: dict[float, tuple] = {}
        self.stage_ops = [self._ops_for(a) for a in c.tableau.diagonal]
        if c.eps >= 1 - 1e-12 and c.t_final * c.velocity.v_max / c.eps > c.length:
            warnings.warn(
                "signals from the left wall reach the right boundary before t_final",
                stacklevel=2,
            )

    def _ops_for(self, a: float):
        if a not in self._ops:
            c = self.config
            ops = assemble_boundary_operators(c.collision, c.eps, c.dt, a)
            n = c.n_x - 2
            system = np.eye(n) - c.eps * a * ops.E * self._avg_g - a * a * c.dt * ops.D * self._lap
            if not np.all(np.isfinite(system)):
                raise SolverError(f"non-finite bounded stage system for a={a}")
            lu = lu_factor(system, check_finite=True)
            if np.min(np.abs(np.diag(lu[0]))) < 1e-14 * np.max(np.abs(system)):
                raise SolverError(f"bounded stage system is singular for a={a}")
            self._ops[a] = (ops, lu)
        return self._ops[a]

    # --- state helpers ---------------------------------------------------
    def initial_state(self, rho_bar=None, g_bar=None) -> InflowState:
        c = self.config
        n, nv = c.n_x - 2, c.velocity.n_v
        rho_bar = np.zeros(n) if rho_bar is None else np.array(rho_bar, dtype=float)
        g_bar = np.zeros((n + 1, nv)) if g_bar is None else np.array(g_bar, dtype=float)
        if rho_bar.shape != (n,) or g_bar.shape != (n + 1, nv):
            raise ConfigError("initial data does not match the bounded grid")
        return self._assemble(rho_bar, g_bar, 0.0)

    def _assemble(self, rho_bar, g_bar, time) -> InflowState:
        grid = self.config.velocity
        rho = rho_bar + self.mats.avg @ grid.bracket(g_bar)
        return InflowState(rho, rho_bar, g_bar, self.config.boundary.close(g_bar), time)

    def transport_term(self, g_closed):
        return _transport(self.config.velocity, self.mats, g_closed)

    # --- time stepping ---------------------------------------------------
    def step(self, state: InflowState) -> InflowState:
        c = self.config
        grid, L = c.velocity, c.collision
        ae, ai = c.tableau.a_explicit, c.tableau.a_implicit
        ci = ai.sum(axis=1)
        eps, dt = c.eps, c.dt
        m = self.mats
        Lt = col.tilde_operator(L)
        vw = grid.v * grid.weights
        g_st, gcl_st, rb_st = [], [], []
        for j in range(c.tableau.s):
            ops, lu = self.stage_ops[j]
            a = ops.a
            x = eps**2 * state.g_bar - eps * dt * ci[j] * np.multiply.outer(self.rho_bd, ops.J)
            grad = np.zeros(c.n_x - 1)
            flux = np.zeros(c.n_x - 2)
            for k in range(j):
                x = x - eps * dt * ae[j, k] * self.transport_term(gcl_st[k])
                x = x + dt * ai[j, k] * (g_st[k] @ Lt.T)
                grad = grad + ai[j, k] * (m.cen_g @ rb_st[k])
                flux = flux + ai[j, k] * (m.cen_rho @ (g_st[k] @ vw))
            x = x - eps * dt * np.multiply.outer(grad, ops.J)
            ix = x @ ops.resolvent.T
            rhs = (
                state.rho
                - (dt / eps) * flux
                - m.avg @ grid.bracket(ix)
                - a * (dt / eps) * (m.cen_rho @ (ix @ vw))
            )
            rho_bar = lu_solve(lu, rhs)
            if not np.all(np.isfinite(rho_bar)):
                raise SolverError(f"non-finite density in stage {j + 1}")
            g = ix - eps * dt * a * np.multiply.outer(m.cen_g @ rho_bar, ops.IJ)
            rb_st.append(rho_bar)
            g_st.append(g)
            gcl_st.append(c.boundary.close(g))
        return self._assemble(rb_st[-1], g_st[-1], state.time + dt)

    def run(self, state: InflowState | None = None, snapshot_every: int | None = None) -> InflowResult:
        c = self.config
        n = c.n_steps
        if not math.isclose(n * c.dt, c.t_final, rel_tol=1e-9, abs_tol=1e-12):
            warnings.warn(f"t_final={c.t_final} is not a multiple of dt={c.dt}", stacklevel=2)
        cur = self.initial_state() if state is None else state.copy()
        res = InflowResult(cur, [cur.time], [cur.copy()])
        data = np.concatenate([np.abs(c.boundary.f_left), np.abs(c.boundary.f_right)])
        scale = max(1.0, float(np.abs(cur.rho).max(initial=0)), float(data.max()))
        for i in range(1, n + 1):
            cur = self.step(cur)
            check_growth(cur.time, scale, cur.rho, cur.g_bar)
            if snapshot_every and i % snapshot_every == 0 and i != n:
                res.times.append(cur.time)
                res.snapshots.append(cur.copy())
        if n:
            res.times.append(cur.time)
            res.snapshots.append(cur.copy())
        res.final = cur
        return res


def step_inflow_first_order(config: InflowConfig, state: InflowState) -> InflowState:
    """One backward/forward Euler step written directly in matrix form."""
    c = config
    grid, eps, dt = c.velocity, c.eps, c.dt
    b = c.boundary
    m = st.boundary_matrices(c.n_x, c.dx)
    rho_bd = st.boundary_rho_vector(b.rho_left, b.rho_right, c.dx, c.n_x)
    ops = assemble_boundary_operators(c.collision, eps, dt)
    T = _transport(grid, m, state.g_bar_closed)
    vw = grid.v * grid.weights
    x = eps**2 * state.g_bar - eps * dt * T - eps * dt * np.multiply.outer(rho_bd, ops.J)
    ix = x @ ops.resolvent.T
    system = np.eye(c.n_x - 2) - eps * ops.E * (m.avg @ m.cen_g) - dt * ops.D * (m.cen_rho @ m.cen_g)
    rhs = state.rho - m.avg @ grid.bracket(ix) - (dt / eps) * (m.cen_rho @ (ix @ vw))
    rho_bar = np.linalg.solve(system, rhs)
    g = ix - eps * dt * np.multiply.outer(m.cen_g @ rho_bar, ops.IJ)
    rho = rho_bar + m.avg @ grid.bracket(g)
    return InflowState(rho, rho_bar, g, b.close(g), state.time + dt)


def inflow_limit_step(config: InflowConfig, rho) -> np.ndarray:
    """The first-order scheme's ``eps -> 0`` map for the interior density."""
    c = config
    b = c.boundary
    m = st.boundary_matrices(c.n_x, c.dx)
    rho_bd = st.boundary_rho_vector(b.rho_left, b.rho_right, c.dx, c.n_x)
    lam = limit_operator(c.collision)
    system = np.eye(c.n_x - 2) + c.dt * lam * (m.cen_rho @ m.cen_g)
    return np.linalg.solve(system, np.asarray(rho) - c.dt * lam * (m.cen_rho @ rho_bd))


def solve_inflow(config: InflowConfig, snapshot_every: int | None = None) -> InflowResult:
    return InflowSolver(config).run(snapshot_every=snapshot_every)


def interior_error(a: InflowState, b: InflowState, dx: float) -> float:
    return norm_l2(a.rho - b.rho, dx)
