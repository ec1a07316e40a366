"""Linear collision operators acting on the velocity grid.

All operators are stored as dense ``n_v x n_v`` matrices and applied to the
last axis of grid functions, so a micro unknown ``g`` of shape ``(n_x, n_v)``
is handled as ``g @ L.T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from apmm.velocity import VelocityGrid

__all__ = [
    "CollisionOperator",
    "CollisionError",
    "StageResolvent",
    "bgk",
    "from_matrix",
    "load_collision",
    "pseudo_inverse_apply",
    "stage_resolvent",
    "diffusion_tensor",
    "kappa",
    "advdiff_apply",
    "tilde_operator",
    "half_resolvent",
]

RANGE_TOL = 1e-10


class CollisionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CollisionOperator:
    matrix: np.ndarray
    grid: VelocityGrid
    kind: str = "custom"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        n = self.grid.n_v
        if m.shape != (n, n):
            raise CollisionError(f"collision matrix must be {n}x{n}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, h):
        return np.asarray(h) @ self.matrix.T

    def check(self, tol: float = 1e-10) -> list[str]:
        """Violations of the null-space, range, symmetry and sign conditions."""
        grid, L = self.grid, self.matrix
        scale = max(np.abs(L).max(), 1.0)
        out = []
        if np.abs(L @ grid.M).max() > tol * scale:
            out.append("L M != 0")
        # bracket(L h) = 0 for all h  <=>  w^T L = 0
        if np.abs(grid.weights @ L).max() > tol * scale * grid.weights.max():
            out.append("range of L is not zero-mean")
        # self-adjoint in L^2(M^{-1} dv): diag(1/M) L symmetric
        S = L / grid.M[:, None]
        if np.abs(S - S.T).max() > tol * np.abs(S).max():
            out.append("L is not self-adjoint in the M^{-1}-weighted product")
        else:
            eig = np.linalg.eigvalsh(0.5 * (S + S.T))
            if eig.max() > tol * np.abs(eig).max():
                out.append("L is not non-positive")
        # null space is exactly span(M)
        sv = np.linalg.svd(L, compute_uv=False)
        if np.sum(sv <= tol * scale) != 1:
            out.append("null space of L is not one-dimensional")
        return out

    @cached_property
    def _deflated(self) -> np.ndarray:
        # L - Pi agrees with L on the zero-mean subspace and maps M to -M
        return self.matrix - self.grid.pi_matrix


def bgk(grid: VelocityGrid) -> CollisionOperator:
    """Relaxation operator ``L h = <h> M - h``."""
    return CollisionOperator(grid.pi_matrix - np.eye(grid.n_v), grid, kind="bgk")


def from_matrix(matrix, grid: VelocityGrid, tol: float = 1e-10) -> CollisionOperator:
    op = CollisionOperator(matrix, grid, kind="custom")
    bad = op.check(tol)
    if bad:
        raise CollisionError("inadmissible collision matrix: " + "; ".join(bad))
    return op


def load_collision(path: str | Path, grid: VelocityGrid) -> CollisionOperator:
    """Read a whitespace-separated dense matrix and validate it."""
    return from_matrix(np.loadtxt(path, ndmin=2), grid)


def _check_zero_mean(grid: VelocityGrid, h, tol: float):
    h = np.asarray(h, dtype=float)
    mean = grid.bracket(h)
    size = grid.bracket(np.abs(h))
    if np.any(np.abs(mean) > tol * np.maximum(size, np.finfo(float).tiny)):
        raise CollisionError(
            f"argument is not in the range of L (max |<h>| = {np.abs(mean).max():.3e})"
        )
    return h


def pseudo_inverse_apply(L: CollisionOperator, h, tol: float = RANGE_TOL):
    """Zero-mean solution ``u`` of ``L u = h`` for zero-mean ``h``."""
    h = _check_zero_mean(L.grid, h, tol)
    n = L.grid.n_v
    u = np.linalg.solve(L._deflated, h.reshape(-1, n).T).T
    return u.reshape(h.shape)


@dataclass(frozen=True, eq=False)
class StageResolvent:
    """Inverse of ``eps^2 I - a_dt L`` for one implicit stage.

    :meth:`apply` solves the full system.  :meth:`apply_range` is the same
    operator restricted to zero-mean arguments; it is what the solvers use,
    because the full matrix has the eigenvalue ``eps^2`` in the direction of
    ``M`` and amplifies rounding in that direction by ``eps^-2``.
    """

    eps: float
    a_dt: float
    full: np.ndarray | None
    range: np.ndarray

    def apply(self, h):
        if self.full is None:
            raise CollisionError("eps = 0: the full stage system is singular")
        return np.asarray(h) @ self.full.T

    def apply_range(self, h):
        return np.asarray(h) @ self.range.T


def _resolvent(op: np.ndarray, projector: np.ndarray, eps: float, a_dt: float):
    n = op.shape[0]
    eye = np.eye(n)
    if eps < 0 or a_dt < 0:
        raise CollisionError("eps and a*dt must be non-negative")
    if eps == 0 and a_dt == 0:
        raise CollisionError("singular stage system: eps = 0 and a*dt = 0")
    system = eps**2 * eye - a_dt * op
    full = np.linalg.inv(system) if eps > 0 else None
    rng = np.linalg.solve(system + projector, eye - projector)
    return full, rng


def stage_resolvent(L: CollisionOperator, eps: float, a_dt: float) -> StageResolvent:
    full, rng = _resolvent(L.matrix, L.grid.pi_matrix, eps, a_dt)
    return StageResolvent(eps, a_dt, full, rng)


def diffusion_tensor(L: CollisionOperator, eps: float, a_dt: float) -> float:
    """Scalar ``< v (eps^2 I - a_dt L)^{-1} (v M) >``."""
    grid = L.grid
    r = stage_resolvent(L, eps, a_dt)
    return float(grid.bracket(grid.v * r.apply_range(grid.vM)))


def kappa(L: CollisionOperator) -> float:
    """Diffusion coefficient ``-< v L^{-1}(v M) >``."""
    grid = L.grid
    return float(-grid.bracket(grid.v * pseudo_inverse_apply(L, grid.vM)))


def advdiff_apply(L: CollisionOperator, A: float, eps: float, f):
    """Advection-diffusion collision ``L f + eps v M A <f>``."""
    if abs(eps * A) >= 1.0:
        raise CollisionError(f"|eps A| must be < 1, got {abs(eps * A)}")
    grid = L.grid
    return L.apply(f) + eps * A * np.multiply.outer(grid.bracket(f), grid.vM)


def tilde_operator(L: CollisionOperator) -> np.ndarray:
    """Half-moment collision matrix ``(I - Pi^-) L``."""
    grid = L.grid
    return (np.eye(grid.n_v) - grid.pi_minus_matrix) @ L.matrix


def half_resolvent(L: CollisionOperator, eps: float, a_dt: float) -> StageResolvent:
    """Stage resolvent of the half-moment operator ``(I - Pi^-) L``.

    The range form acts on functions with zero incoming half-bracket.
    """
    grid = L.grid
    full, rng = _resolvent(tilde_operator(L), grid.pi_minus_matrix, eps, a_dt)
    return StageResolvent(eps, a_dt, full, rng)
