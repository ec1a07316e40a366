"""Error norms, order fits and asymptotic diagnostics."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from apmm import collision as col
from apmm.stencils import Stencil
from apmm.tableau import DoubleButcherTableau, SchemeClass, classify

__all__ = [
    "GridMismatch",
    "error",
    "OrderFit",
    "observed_order",
    "ConvergenceStudy",
    "ap_residual",
    "PiTensor",
    "pi_tensor_eval",
    "limit_fluxes",
    "limit_scheme_check",
]


class GridMismatch(ValueError):
    pass


def error(a, b, norm: str = "L2", dx: float = 1.0) -> float:
    """``dx``-weighted discrete L2 norm or max norm of ``a - b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise GridMismatch(f"cannot compare arrays of shape {a.shape} and {b.shape}")
    d = a - b
    key = norm.lower()
    if key == "l2":
        return float(math.sqrt(dx * np.sum(d * d)))
    if key in ("linf", "inf", "max"):
        return float(np.max(np.abs(d))) if d.size else 0.0
    raise ValueError(f"unknown norm {norm!r}; use 'L2' or 'Linf'")


@dataclass(frozen=True)
class OrderFit:
    slope: float
    intercept: float
    used: tuple[int, ...]
    local: tuple[float, ...]


def _fit(steps, errors):
    slope, intercept = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope), float(intercept)


def observed_order(errors, steps, drop_preasymptotic: bool = True, tol: float = 0.5) -> OrderFit:
    """Least-squares slope of ``log(error)`` against ``log(step)``.

    With ``drop_preasymptotic`` the point with the largest step is left out
    when the local slope it forms with its neighbour differs by more than
    ``tol`` from the fit of the remaining points, and at least three points
    remain.  :attr:`OrderFit.used` lists the indices that entered the fit.
    """
    e = np.asarray(errors, dtype=float)
    h = np.asarray(steps, dtype=float)
    if e.shape != h.shape or e.ndim != 1:
        raise ValueError("errors and steps must be 1D arrays of equal length")
    if e.size < 3:
        raise ValueError(f"need at least 3 points for an order fit, got {e.size}")
    if np.any(~np.isfinite(e)) or np.any(e <= 0):
        raise ValueError("errors must be positive and finite")
    if np.any(h <= 0):
        raise ValueError("steps must be positive")
    order = np.argsort(h)[::-1]
    hs, es = h[order], e[order]
    local = tuple(
        float(np.log(es[i] / es[i + 1]) / np.log(hs[i] / hs[i + 1])) for i in range(len(hs) - 1)
    )
    keep = list(range(len(hs)))
    if drop_preasymptotic and len(hs) >= 4:
        rest, _ = _fit(hs[1:], es[1:])
        if abs(local[0] - rest) > tol:
            keep = keep[1:]
    slope, intercept = _fit(hs[keep], es[keep])
    return OrderFit(slope, intercept, tuple(int(order[i]) for i in keep), local)


@dataclass
class ConvergenceStudy:
    """Errors of one scheme at one eps against a step or grid parameter."""

    scheme: str
    eps: float
    param_name: str
    params: list
    l2: list
    linf: list
    reference: str = ""
    fit: OrderFit | None = field(default=None)

    def fit_order(self, drop_preasymptotic: bool = True) -> OrderFit:
        steps = self.params if self.param_name != "n_x" else [1.0 / p for p in self.params]
        self.fit = observed_order(self.l2, steps, drop_preasymptotic)
        return self.fit

    @property
    def slope(self) -> float:
        return (self.fit or self.fit_order()).slope

    def rows(self) -> list[dict]:
        slope = self.slope
        return [
            {
                "scheme": self.scheme,
                "eps": self.eps,
                "param": p,
                "L2_error": a,
                "Linf_error": b,
                "fitted_slope": slope,
            }
            for p, a, b in zip(self.params, self.l2, self.linf)
        ]


def ap_residual(rho, g, eps: float, L: col.CollisionOperator, cen_g) -> float:
    """``max |g - eps L^-1(v M) (G rho)|`` over space and velocity.

    ``cen_g`` is a :class:`Stencil` or a matrix mapping nodal values to the
    micro grid.
    """
    grid = L.grid
    u = col.pseudo_inverse_apply(L, grid.vM)
    grad = cen_g.apply(rho) if isinstance(cen_g, Stencil) else np.asarray(cen_g) @ rho
    return float(np.max(np.abs(np.asarray(g) - eps * np.multiply.outer(grad, u))))


# --- Pi tensors ------------------------------------------------------------------
@dataclass(frozen=True)
class PiTensor:
    """``Pi^m_{j,k1}`` evaluated on stand-in stage data (stage labels are 1-based)."""

    j: int
    k1: int
    m: int
    value: np.ndarray


def _first_stage(tableau: DoubleButcherTableau) -> int:
    """1 for type A, 2 for CK-ARS (first stage is explicit and skipped)."""
    cls = classify(tableau)
    if cls is SchemeClass.TYPE_A:
        return 1
    if cls is SchemeClass.TYPE_CK_ARS:
        return 2
    raise ValueError(f"{tableau.name}: Pi tensors need a type A or CK-ARS tableau, got {cls.value}")


def _stage_terms(tableau, grad_rho, a_rho, L):
    """``R^k`` for every stage as arrays ``(n_x, n_v)``, keyed by 1-based label."""
    first = _first_stage(tableau)
    ai, ae = tableau.a_implicit, tableau.a_explicit
    grid = L.grid
    u = col.pseudo_inverse_apply(L, grid.vM)
    s = tableau.s
    R = {}
    for k in range(first, s + 1):
        acc = np.zeros_like(np.asarray(grad_rho[0], dtype=float))
        for kp in range(first, k + 1):
            acc = acc + ai[k - 1, kp - 1] * grad_rho[kp - 1]
        for kp in range(first, k):
            acc = acc - ae[k - 1, kp - 1] * a_rho[kp - 1]
        R[k] = np.multiply.outer(acc, u)
    return R


def pi_tensor_eval(tableau: DoubleButcherTableau, j: int, k1: int, m: int, grad_rho, a_rho,
                   L: col.CollisionOperator) -> PiTensor:
    """Literal nested-sum evaluation of ``Pi^m_{j,k1}``.

    ``grad_rho[k-1]`` and ``a_rho[k-1]`` stand in for ``grad rho^(k)`` and
    ``A rho^(k)``.  The chain ``k1 > k2 > ... > km`` runs over every strictly
    decreasing index sequence, each link weighted by ``a_{k_l k_{l+1}} /
    a_{k_{l+1} k_{l+1}}``.
    """
    first = _first_stage(tableau)
    s = tableau.s
    if not (first <= j <= s and first <= k1 <= j and 1 <= m <= j - first + 1):
        raise ValueError(f"indices out of range: j={j}, k1={k1}, m={m} for s={s}")
    ai = tableau.a_implicit
    if ai[k1 - 1, k1 - 1] == 0:
        raise ValueError(f"a_{k1}{k1} = 0: Pi tensor undefined")
    R = _stage_terms(tableau, grad_rho, a_rho, L)
    grid = L.grid
    total = np.zeros_like(R[j])
    for tail in itertools.combinations(range(k1 - 1, first - 1, -1), m - 1):
        chain = (k1,) + tail
        w = 1.0
        for a, b in zip(chain, chain[1:]):
            w *= ai[a - 1, b - 1] / ai[b - 1, b - 1]
        total = total + w * R[chain[-1]]
    value = (ai[j - 1, k1 - 1] / ai[k1 - 1, k1 - 1]) * grid.bracket(grid.v * total)
    return PiTensor(j, k1, m, value)


def limit_fluxes(tableau: DoubleButcherTableau, j: int, grad_rho, a_rho, L: col.CollisionOperator):
    """Flux of stage ``j`` from the alternating Pi sum and from the closed form.

    Both are the vector field whose divergence times ``dt`` is added to
    ``rho^n``; equal fluxes imply equal limit stages.
    """
    first = _first_stage(tableau)
    ai, ae = tableau.a_implicit, tableau.a_explicit
    grid = L.grid
    alt = 0.0
    for k1 in range(first, j + 1):
        for ell in range(1, j - first + 2):
            alt = alt + (-1) ** ell * pi_tensor_eval(tableau, j, k1, ell, grad_rho, a_rho, L).value
    lam = float(grid.bracket(grid.v * col.pseudo_inverse_apply(L, grid.vM)))
    closed = 0.0
    for k in range(first, j + 1):
        closed = closed - ai[j - 1, k - 1] * lam * grad_rho[k - 1]
    for k in range(first, j):
        closed = closed + ae[j - 1, k - 1] * lam * a_rho[k - 1]
    return np.asarray(alt), np.asarray(closed)


def limit_scheme_check(tableau: DoubleButcherTableau, grad_rho, a_rho, L: col.CollisionOperator) -> float:
    """Largest deviation between the two limit forms over all stages."""
    first = _first_stage(tableau)
    dev = 0.0
    for j in range(first, tableau.s + 1):
        alt, closed = limit_fluxes(tableau, j, grad_rho, a_rho, L)
        dev = max(dev, float(np.max(np.abs(alt - closed))))
    return dev
