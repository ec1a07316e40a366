"""Comparison solvers that do not use the micro-macro algebra.

* an IMEX discrete-velocity solver for the full kinetic equation, periodic
  or with inflow data,
* a DIRK solver for the limiting diffusion equation,
* an IMEX solver for the limiting advection-diffusion equation,
* the asymptotic wall density for non-equilibrium inflow data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from apmm import collision as col
from apmm import stencils as st
from apmm.tableau import DoubleButcherTableau, is_gsa
from apmm.velocity import VelocityGrid

__all__ = [
    "KineticState",
    "BGKSolver",
    "BGKInflowSolver",
    "bgk_imex_step",
    "periodic_laplacian",
    "dirichlet_laplacian",
    "diffusion_implicit_step",
    "run_diffusion",
    "advdiff_limit_step",
    "run_advdiff_limit",
    "klar_boundary_rho",
]


@dataclass
class KineticState:
    f: np.ndarray
    time: float = 0.0

    def density(self, grid: VelocityGrid) -> np.ndarray:
        return grid.bracket(self.f)


def _check_tableau(tableau: DoubleButcherTableau):
    ai = tableau.a_implicit
    if np.any(np.triu(ai, 1) != 0):
        raise ValueError(f"{tableau.name}: implicit part must be lower triangular")
    if not is_gsa(tableau):
        raise ValueError(f"{tableau.name}: only globally stiffly accurate tableaux are supported")


class BGKSolver:
    """Periodic IMEX solver for ``eps^2 f_t + eps v f_x = L f`` on nodes.

    Transport is upwinded and explicit, collision implicit.  The stage
    resolvents are the full ``(eps^2 I - a dt L)^-1``.
    """

    def __init__(self, tableau, eps, dt, n_x, length=2 * math.pi, upwind_order=3,
                 collision: col.CollisionOperator | None = None, grid: VelocityGrid | None = None):
        _check_tableau(tableau)
        if not eps > 0:
            raise ValueError("the kinetic reference needs eps > 0")
        self.tableau, self.eps, self.dt = tableau, float(eps), float(dt)
        self.grid = grid if grid is not None else (collision.grid if collision else VelocityGrid(5.0, 10))
        self.L = collision if collision is not None else col.bgk(self.grid)
        self.n_x, self.length = n_x, length
        self.dx = length / n_x
        self.g_minus, self.g_plus = st.upwind_pair(upwind_order, self.dx)
        self._res = {a: col.stage_resolvent(self.L, eps, a * dt).full for a in set(tableau.diagonal)}

    def transport(self, f):
        v = self.grid
        return v.v_plus * self.g_minus.apply(f) + v.v_minus * self.g_plus.apply(f)

    def step(self, state: KineticState) -> KineticState:
        t, eps, dt = self.tableau, self.eps, self.dt
        ae, ai = t.a_explicit, t.a_implicit
        stages, tr, lf = [], [], []
        for j in range(t.s):
            rhs = eps**2 * state.f
            for k in range(j):
                rhs = rhs - eps * dt * ae[j, k] * tr[k] + dt * ai[j, k] * lf[k]
            fj = rhs @ self._res[ai[j, j]].T
            stages.append(fj)
            tr.append(self.transport(fj))
            lf.append(self.L.apply(fj))
        return KineticState(stages[-1], state.time + dt)

    def run(self, f0, t_final: float) -> KineticState:
        state = KineticState(np.array(f0, dtype=float))
        for _ in range(int(round(t_final / self.dt))):
            state = self.step(state)
        return state


class BGKInflowSolver(BGKSolver):
    """Kinetic solver on ``[0, length]`` with first-order upwinding.

    Nodes ``x_i = i dx``, ``dx = length / (n_x - 1)``; only interior nodes
    evolve.  The wall nodes hold the inflow data, of which only the incoming
    components enter the upwind differences.
    """

    def __init__(self, tableau, eps, dt, n_x, f_left, f_right=None, length=2.0,
                 collision: col.CollisionOperator | None = None, grid: VelocityGrid | None = None):
        super().__init__(tableau, eps, dt, n_x, length, 1, collision, grid)
        self.dx = length / (n_x - 1)
        self.f_left = np.asarray(f_left, dtype=float)
        self.f_right = np.zeros(self.grid.n_v) if f_right is None else np.asarray(f_right, float)

    def transport(self, f):
        v = self.grid
        full = np.vstack([self.f_left, f, self.f_right])
        back = (full[1:-1] - full[:-2]) / self.dx
        fwd = (full[2:] - full[1:-1]) / self.dx
        return v.v_plus * back + v.v_minus * fwd

    def run(self, f0=None, t_final: float = 0.0) -> KineticState:
        if f0 is None:
            f0 = np.zeros((self.n_x - 2, self.grid.n_v))
        return super().run(f0, t_final)


def bgk_imex_step(solver: BGKSolver, state: KineticState) -> KineticState:
    return solver.step(state)


# --- limiting equations ------------------------------------------------------
def periodic_laplacian(n_x: int, length: float = 2 * math.pi, staggered: bool = False,
                       central_order: int = 4) -> np.ndarray:
    """Composed difference matrix ``G_cen_rho G_cen_g`` of the periodic solver."""
    dx = length / n_x
    if staggered:
        g = st.central(2, "g", dx).matrix(n_x)
        r = st.central(2, "rho", dx).matrix(n_x)
    else:
        g = r = st.central(central_order, "colocated", dx).matrix(n_x)
    return r @ g


def dirichlet_laplacian(n_x: int, length: float, left: float, right: float):
    """``B_cen_rho B_cen_g`` on interior nodes plus the wall-value source."""
    dx = length / (n_x - 1)
    m = st.boundary_matrices(n_x, dx)
    bd = st.boundary_rho_vector(left, right, dx, n_x)
    return m.cen_rho @ m.cen_g, m.cen_rho @ bd


def diffusion_implicit_step(rho, dt: float, tableau: DoubleButcherTableau, kappa: float,
                            laplacian: np.ndarray, source=None) -> np.ndarray:
    """One DIRK step of ``rho_t = kappa (Lap rho + source)`` with the implicit weights."""
    _check_tableau(tableau)
    ai = tableau.a_implicit
    rho = np.asarray(rho, dtype=float)
    n = rho.size
    src = np.zeros(n) if source is None else np.asarray(source, dtype=float)
    K = kappa * laplacian
    b = kappa * src
    stages, rates = [], []
    for j in range(tableau.s):
        rhs = rho + dt * ai[j, j] * b
        for k in range(j):
            rhs = rhs + dt * ai[j, k] * rates[k]
        rj = np.linalg.solve(np.eye(n) - dt * ai[j, j] * K, rhs)
        stages.append(rj)
        rates.append(K @ rj + b)
    return stages[-1]


def run_diffusion(rho0, dt, t_final, tableau, kappa, laplacian, source=None):
    rho = np.array(rho0, dtype=float)
    for _ in range(int(round(t_final / dt))):
        rho = diffusion_implicit_step(rho, dt, tableau, kappa, laplacian, source)
    return rho


def advdiff_limit_step(rho, dt: float, tableau: DoubleButcherTableau, kappa: float, A: float,
                       laplacian: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    """IMEX step of ``rho_t = kappa Lap rho - kappa A grad rho``.

    Diffusion uses the implicit weights, advection the explicit ones.
    ``gradient`` is the discrete derivative acting on nodal values (for the
    staggered grid: ``G_cen_rho`` composed with the averaging).
    """
    _check_tableau(tableau)
    ae, ai = tableau.a_explicit, tableau.a_implicit
    rho = np.asarray(rho, dtype=float)
    n = rho.size
    K = kappa * laplacian
    adv = -kappa * A * gradient
    stages, diff, drift = [], [], []
    for j in range(tableau.s):
        rhs = rho.copy()
        for k in range(j):
            rhs = rhs + dt * (ai[j, k] * diff[k] + ae[j, k] * drift[k])
        rj = np.linalg.solve(np.eye(n) - dt * ai[j, j] * K, rhs)
        stages.append(rj)
        diff.append(K @ rj)
        drift.append(adv @ rj)
    return stages[-1]


def run_advdiff_limit(rho0, dt, t_final, tableau, kappa, A, laplacian, gradient):
    rho = np.array(rho0, dtype=float)
    for _ in range(int(round(t_final / dt))):
        rho = advdiff_limit_step(rho, dt, tableau, kappa, A, laplacian, gradient)
    return rho


def klar_boundary_rho(f_b, grid: VelocityGrid, kappa: float) -> float:
    """Wall density of the diffusion limit for inflow data ``f_b`` (``v > 0`` part)."""
    f_b = np.asarray(f_b, dtype=float)
    pos = grid.v > 0
    v, M, dv = grid.v[pos], grid.M[pos], grid.dv
    ratio = np.sum(v * f_b[pos] * dv) / np.sum(v * M * dv)
    corr = np.sum(v**2 * (f_b[pos] - M * ratio) * dv) / (kappa * np.sum(grid.M * dv))
    return float(ratio + corr)
