"""Discrete velocity grid, moment brackets and equilibrium projections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["VelocityGrid", "gaussian", "HalfSetError"]


class HalfSetError(ValueError):
    pass


def gaussian(v):
    """Normalized Maxwellian ``exp(-v^2/2)/sqrt(2 pi)``."""
    return np.exp(-0.5 * np.asarray(v) ** 2) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class VelocityGrid:
    """Uniform midpoint grid on ``[-v_max, v_max]`` with ``n_v`` points.

    Points sit at ``-v_max + (k + 1/2) dv`` so the grid is symmetric about
    zero, which makes the first moment of any even equilibrium vanish
    exactly.  Brackets act on the last axis of their argument.

    The incoming half set is ``V_-`` = {v > 0}, i.e. the choice
    ``omega(x, v) = -v`` for every x.
    """

    v_max: float
    n_v: int
    equilibrium: Callable = gaussian
    v: np.ndarray = field(init=False, repr=False)
    dv: float = field(init=False)
    M: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    minus: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.v_max <= 0:
            raise ValueError(f"v_max must be positive, got {self.v_max}")
        if self.n_v <= 0 or self.n_v % 2:
            raise ValueError(f"n_v must be a positive even integer, got {self.n_v}")
        dv = 2.0 * self.v_max / self.n_v
        v = -self.v_max + (np.arange(self.n_v) + 0.5) * dv
        # enforce exact antisymmetry of the points
        v = 0.5 * (v - v[::-1])
        M = np.asarray(self.equilibrium(v), dtype=float)
        if M.shape != v.shape:
            raise ValueError("equilibrium must map the grid to an array of equal shape")
        if np.any(M <= 0):
            raise ValueError("equilibrium must be positive on the grid")
        if not np.allclose(M, M[::-1], rtol=1e-13, atol=0):
            raise ValueError("equilibrium must be even")
        M = 0.5 * (M + M[::-1])
        minus = v > 0
        for name, val in [
            ("v", v),
            ("M", M),
            ("weights", np.full(self.n_v, dv) / (M.sum() * dv)),
            ("minus", minus),
        ]:
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "dv", dv)

    @classmethod
    def from_spacing(cls, v_max: float, dv: float, equilibrium: Callable = gaussian):
        n_v = int(round(2.0 * v_max / dv))
        if not math.isclose(n_v * dv, 2.0 * v_max, rel_tol=1e-12):
            raise ValueError(f"dv={dv} does not divide [-{v_max}, {v_max}] evenly")
        return cls(v_max, n_v, equilibrium)

    # --- derived vectors -------------------------------------------------
    @property
    def vM(self) -> np.ndarray:
        return self.v * self.M

    @property
    def v_plus(self) -> np.ndarray:
        return 0.5 * (self.v + np.abs(self.v))

    @property
    def v_minus(self) -> np.ndarray:
        return 0.5 * (self.v - np.abs(self.v))

    def half_weights(self, side: str = "minus") -> np.ndarray:
        mask = self._mask(side)
        if not mask.any():
            raise HalfSetError(f"half set {side!r} is empty")
        w = np.where(mask, self.dv, 0.0)
        return w / (self.M[mask].sum() * self.dv)

    def _mask(self, side: str) -> np.ndarray:
        if side == "minus":
            return self.minus
        if side == "plus":
            return ~self.minus
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")

    # --- brackets and projections ----------------------------------------
    def bracket(self, h):
        return np.asarray(h) @ self.weights

    def half_bracket(self, h, side: str = "minus"):
        return np.asarray(h) @ self.half_weights(side)

    def project_pi(self, h):
        return np.multiply.outer(self.bracket(h), self.M)

    def project_pi_minus(self, h):
        return np.multiply.outer(self.half_bracket(h, "minus"), self.M)

    @property
    def pi_matrix(self) -> np.ndarray:
        """Matrix P with ``P @ h == project_pi(h)`` for a single velocity vector."""
        return np.outer(self.M, self.weights)

    @property
    def pi_minus_matrix(self) -> np.ndarray:
        return np.outer(self.M, self.half_weights("minus"))
