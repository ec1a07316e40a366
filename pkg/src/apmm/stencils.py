"""Finite-difference stencils on periodic and bounded 1D grids.

Periodic operators are kept as offset/coefficient lists (:class:`Stencil`)
and applied with ``np.roll``; dense matrices are only built where a linear
system has to be factorized.  The ``circ`` convention: the marked entry of
the coefficient list sits on the diagonal, later entries on the
superdiagonals and earlier ones on the subdiagonals, wrapping around.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Stencil",
    "StencilError",
    "circ",
    "banded",
    "upwind_pair",
    "central",
    "average",
    "BoundaryMatrices",
    "boundary_matrices",
    "boundary_rho_vector",
]


class StencilError(ValueError):
    pass


@dataclass(frozen=True)
class Stencil:
    """Periodic difference operator ``(S u)_i = scale * sum_k c_k u_{i + o_k}``."""

    offsets: tuple[int, ...]
    coeffs: tuple[float, ...]
    scale: float = 1.0

    @classmethod
    def from_circ(cls, coeffs, diag_index: int, scale: float = 1.0) -> "Stencil":
        coeffs = [float(c) for c in coeffs]
        if not 0 <= diag_index < len(coeffs):
            raise StencilError(f"diagonal index {diag_index} outside the stencil")
        pairs = [(k - diag_index, c) for k, c in enumerate(coeffs) if c != 0.0]
        return cls(tuple(o for o, _ in pairs), tuple(c for _, c in pairs), scale)

    @property
    def width(self) -> int:
        if not self.offsets:
            return 1
        return max(self.offsets) - min(self.offsets) + 1

    def scaled(self, factor: float) -> "Stencil":
        return Stencil(self.offsets, self.coeffs, self.scale * factor)

    def weights(self) -> np.ndarray:
        return self.scale * np.asarray(self.coeffs)

    def apply(self, u, axis: int = 0):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for o, c in zip(self.offsets, self.weights()):
            out += c * np.roll(u, -o, axis=axis)
        return out

    def matrix(self, n: int) -> np.ndarray:
        if n < self.width:
            raise StencilError(f"grid of {n} points is narrower than the stencil")
        m = np.zeros((n, n))
        rows = np.arange(n)
        for o, c in zip(self.offsets, self.weights()):
            m[rows, (rows + o) % n] += c
        return m


def circ(coeffs, diag_index: int, n: int, scale: float = 1.0) -> np.ndarray:
    """Dense ``n x n`` circulant matrix with ``coeffs[diag_index]`` on the diagonal."""
    if n < len(coeffs):
        raise StencilError(f"n={n} is smaller than the stencil width {len(coeffs)}")
    return Stencil.from_circ(coeffs, diag_index, scale).matrix(n)


def banded(coeffs, diag_index: int, rows: int, cols: int, scale: float = 1.0):
    """Rectangular band matrix with the ``circ`` placement but no wrap-around."""
    m = np.zeros((rows, cols))
    r = np.arange(rows)
    for k, c in enumerate(coeffs):
        col = r + (k - diag_index)
        ok = (col >= 0) & (col < cols)
        m[r[ok], col[ok]] = scale * float(c)
    return m


_UPWIND = {
    1: (([-1, 1], 1, 1.0), ([-1, 1], 0, 1.0)),
    3: (([1, -6, 3, 2], 2, 1 / 6), ([-2, -3, 6, -1], 1, 1 / 6)),
}


def upwind_pair(order: int, dx: float) -> tuple[Stencil, Stencil]:
    """Backward-biased and forward-biased first-derivative stencils.

    The first one is used for positive velocities, the second for negative.
    The same coefficients serve staggered and colocated grids because both
    act on the micro grid only.
    """
    if order not in _UPWIND:
        raise StencilError(f"unsupported upwind order {order}; use 1 or 3")
    (cm, im, sm), (cp, ip, sp) = _UPWIND[order]
    return (
        Stencil.from_circ(cm, im, sm / dx),
        Stencil.from_circ(cp, ip, sp / dx),
    )


def central(order: int, target: str, dx: float) -> Stencil:
    """Central first-derivative stencils.

    ``target='g'`` maps rho-nodes to the staggered micro grid,
    ``target='rho'`` maps the micro grid back to rho-nodes, and
    ``target='colocated'`` is the single-grid operator of order 2 or 4.
    """
    if target == "g":
        if order != 2:
            raise StencilError("staggered stencils are the two-point forms (order 2)")
        return Stencil.from_circ([-1, 1], 0, 1 / dx)
    if target == "rho":
        if order != 2:
            raise StencilError("staggered stencils are the two-point forms (order 2)")
        return Stencil.from_circ([-1, 1], 1, 1 / dx)
    if target == "colocated":
        if order == 2:
            return Stencil.from_circ([-1, 0, 1], 1, 1 / (2 * dx))
        if order == 4:
            return Stencil.from_circ([1, -8, 0, 8, -1], 2, 1 / (12 * dx))
        raise StencilError(f"unsupported colocated central order {order}")
    raise StencilError(f"unknown target {target!r}")


def average(staggered: bool) -> Stencil:
    """Move nodal values to the micro grid (identity when colocated)."""
    if staggered:
        return Stencil.from_circ([1, 1], 0, 0.5)
    return Stencil((0,), (1.0,))


@dataclass(frozen=True)
class BoundaryMatrices:
    """Difference matrices of the bounded staggered grid.

    Nodes ``x_i = i dx`` for ``i = 0..n_x-1``; macro unknowns live on the
    ``n_x - 2`` interior nodes, the micro unknown on the ``n_x - 1``
    half-points and its closed version adds one ghost half-point per side.
    """

    upw_minus: np.ndarray  # (n_x-1, n_x+1)
    upw_plus: np.ndarray  # (n_x-1, n_x+1)
    cen_rho: np.ndarray  # (n_x-2, n_x-1)
    avg: np.ndarray  # (n_x-2, n_x-1)
    cen_g: np.ndarray  # (n_x-1, n_x-2)


def boundary_matrices(n_x: int, dx: float) -> BoundaryMatrices:
    if n_x < 4:
        raise StencilError(f"bounded grids need n_x >= 4, got {n_x}")
    return BoundaryMatrices(
        upw_minus=banded([-1, 1], 0, n_x - 1, n_x + 1, 1 / dx),
        upw_plus=banded([0, -1, 1], 0, n_x - 1, n_x + 1, 1 / dx),
        cen_rho=banded([-1, 1], 0, n_x - 2, n_x - 1, 1 / dx),
        avg=banded([1, 1], 0, n_x - 2, n_x - 1, 0.5),
        cen_g=banded([-1, 1], 1, n_x - 1, n_x - 2, 1 / dx),
    )


def boundary_rho_vector(left: float, right: float, dx: float, n_x: int) -> np.ndarray:
    """Boundary contribution completing ``cen_g`` at the two end half-points."""
    out = np.zeros(n_x - 1)
    out[0] = -left / dx
    out[-1] = right / dx
    return out
