"""Double Butcher tableaux for IMEX Runge-Kutta schemes.

A tableau pairs an explicit (strictly lower triangular) coefficient matrix
with an implicit (lower triangular) one.  The micro-macro solvers only accept
globally stiffly accurate (GSA) tableaux, for which the last stage is the
update itself.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

__all__ = [
    "DoubleButcherTableau",
    "SchemeClass",
    "TableauError",
    "validate",
    "is_gsa",
    "classify",
    "builtin",
    "builtin_names",
    "load_tableau",
    "dump_tableau",
]

ROW_SUM_TOL = 1e-12


class TableauError(ValueError):
    pass


class SchemeClass(enum.Enum):
    TYPE_A = "A"
    TYPE_CK_ARS = "CK-ARS"
    TYPE_CK = "CK"
    INVALID = "invalid"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DoubleButcherTableau:
    """Explicit/implicit coefficient pair of an IMEX RK scheme.

    ``c_explicit`` and ``c_implicit`` default to the row sums of the
    respective matrices.  ``gsa`` is a claim checked by :func:`validate`.
    """

    name: str
    a_explicit: np.ndarray
    a_implicit: np.ndarray
    b_explicit: np.ndarray
    b_implicit: np.ndarray
    c_explicit: np.ndarray | None = None
    c_implicit: np.ndarray | None = None
    gsa: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        ae = _frozen(self.a_explicit)
        ai = _frozen(self.a_implicit)
        s = ae.shape[0]
        if ae.shape != (s, s) or ai.shape != (s, s):
            raise TableauError(
                f"{self.name}: coefficient matrices must both be s x s, "
                f"got {ae.shape} and {ai.shape}"
            )
        be = _frozen(self.b_explicit)
        bi = _frozen(self.b_implicit)
        if be.shape != (s,) or bi.shape != (s,):
            raise TableauError(f"{self.name}: weight vectors must have length {s}")
        ce = _frozen(ae.sum(axis=1) if self.c_explicit is None else self.c_explicit)
        ci = _frozen(ai.sum(axis=1) if self.c_implicit is None else self.c_implicit)
        if ce.shape != (s,) or ci.shape != (s,):
            raise TableauError(f"{self.name}: abscissae must have length {s}")
        for attr, val in [
            ("a_explicit", ae),
            ("a_implicit", ai),
            ("b_explicit", be),
            ("b_implicit", bi),
            ("c_explicit", ce),
            ("c_implicit", ci),
        ]:
            object.__setattr__(self, attr, val)

    @property
    def s(self) -> int:
        return self.a_explicit.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.a_implicit)

    def __repr__(self):
        return f"DoubleButcherTableau({self.name!r}, s={self.s})"


def is_gsa(t: DoubleButcherTableau, tol: float = ROW_SUM_TOL) -> bool:
    """Whether the last rows reproduce the weights and both last abscissae are 1."""
    return (
        abs(t.c_implicit[-1] - 1.0) <= tol
        and abs(t.c_explicit[-1] - 1.0) <= tol
        and np.allclose(t.a_implicit[-1], t.b_implicit, rtol=0, atol=tol)
        and np.allclose(t.a_explicit[-1], t.b_explicit, rtol=0, atol=tol)
    )


def validate(t: DoubleButcherTableau, tol: float = ROW_SUM_TOL) -> list[str]:
    """Return every violated tableau invariant (an empty list means valid)."""
    problems = []
    s = t.s
    ae, ai = t.a_explicit, t.a_implicit
    for i in range(s):
        for j in range(i, s):
            if ae[i, j] != 0.0:
                problems.append(
                    f"a_explicit[{i},{j}]={ae[i, j]!r} above or on the diagonal"
                )
        for j in range(i + 1, s):
            if ai[i, j] != 0.0:
                problems.append(f"a_implicit[{i},{j}]={ai[i, j]!r} above the diagonal")
    row_e = ae.sum(axis=1)
    row_i = ai.sum(axis=1)
    for i in range(s):
        if abs(row_e[i] - t.c_explicit[i]) > tol:
            problems.append(
                f"explicit row {i}: sum {row_e[i]!r} != c_explicit {t.c_explicit[i]!r}"
            )
        if abs(row_i[i] - t.c_implicit[i]) > tol:
            problems.append(
                f"implicit row {i}: sum {row_i[i]!r} != c_implicit {t.c_implicit[i]!r}"
            )
    if t.gsa:
        if abs(t.c_implicit[-1] - 1.0) > tol:
            problems.append(f"GSA: c_implicit[-1]={t.c_implicit[-1]!r} != 1")
        if abs(t.c_explicit[-1] - 1.0) > tol:
            problems.append(f"GSA: c_explicit[-1]={t.c_explicit[-1]!r} != 1")
        for j in range(s):
            if abs(ai[-1, j] - t.b_implicit[j]) > tol:
                problems.append(
                    f"GSA: a_implicit[{s - 1},{j}]={ai[-1, j]!r} != b_implicit[{j}]"
                )
            if abs(ae[-1, j] - t.b_explicit[j]) > tol:
                problems.append(
                    f"GSA: a_explicit[{s - 1},{j}]={ae[-1, j]!r} != b_explicit[{j}]"
                )
    return problems


def classify(t: DoubleButcherTableau) -> SchemeClass:
    if validate(t):
        return SchemeClass.INVALID
    ai = t.a_implicit
    diag = np.diag(ai)
    if np.all(diag != 0.0):
        return SchemeClass.TYPE_A
    # lower triangular: trailing block invertible <=> its diagonal is nonzero
    if np.all(ai[0] == 0.0) and np.all(diag[1:] != 0.0):
        if np.all(ai[:, 0] == 0.0):
            return SchemeClass.TYPE_CK_ARS
        return SchemeClass.TYPE_CK
    return SchemeClass.INVALID


# ---------------------------------------------------------------------------
# built-in schemes


def _ars111() -> DoubleButcherTableau:
    return DoubleButcherTableau(
        "ARS111",
        a_explicit=[[0, 0], [1, 0]],
        a_implicit=[[0, 0], [0, 1]],
        b_explicit=[1, 0],
        b_implicit=[0, 1],
        gsa=True,
    )


def _ars222(gamma=None) -> DoubleButcherTableau:
    g = 1.0 - 1.0 / math.sqrt(2.0) if gamma is None else gamma
    d = 1.0 - 1.0 / (2.0 * g)
    return DoubleButcherTableau(
        "ARS222",
        a_explicit=[[0, 0, 0], [g, 0, 0], [d, 1 - d, 0]],
        a_implicit=[[0, 0, 0], [0, g, 0], [0, 1 - g, g]],
        b_explicit=[d, 1 - d, 0],
        b_implicit=[0, 1 - g, g],
        gsa=True,
        params={"gamma": g, "delta": d},
    )


def _ars443() -> DoubleButcherTableau:
    ae = [
        [0, 0, 0, 0, 0],
        [1 / 2, 0, 0, 0, 0],
        [11 / 18, 1 / 18, 0, 0, 0],
        [5 / 6, -5 / 6, 1 / 2, 0, 0],
        [1 / 4, 7 / 4, 3 / 4, -7 / 4, 0],
    ]
    ai = [
        [0, 0, 0, 0, 0],
        [0, 1 / 2, 0, 0, 0],
        [0, 1 / 6, 1 / 2, 0, 0],
        [0, -1 / 2, 1 / 2, 1 / 2, 0],
        [0, 3 / 2, -3 / 2, 1 / 2, 1 / 2],
    ]
    return DoubleButcherTableau(
        "ARS443",
        a_explicit=ae,
        a_implicit=ai,
        b_explicit=ae[-1],
        b_implicit=ai[-1],
        gsa=True,
    )


def _dp_a121(gamma=None) -> DoubleButcherTableau:
    g = 1.0 if gamma is None else gamma
    if g < 0.5:
        raise TableauError(f"DP_A121 needs gamma >= 1/2, got {g}")
    return DoubleButcherTableau(
        "DP_A121",
        a_explicit=[[0, 0], [1, 0]],
        a_implicit=[[g, 0], [1 - g, g]],
        b_explicit=[1, 0],
        b_implicit=[1 - g, g],
        gsa=True,
        params={"gamma": g},
    )


def _dp2_a242(gamma=None) -> DoubleButcherTableau:
    g = 1.0 - 1.0 / math.sqrt(2.0) if gamma is None else gamma
    return DoubleButcherTableau(
        "DP2_A242",
        a_explicit=[[0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 0, 0], [0, 1 / 2, 1 / 2, 0]],
        a_implicit=[
            [g, 0, 0, 0],
            [-g, g, 0, 0],
            [0, 1 - g, g, 0],
            [0, 1 / 2, 1 / 2 - g, g],
        ],
        b_explicit=[0, 1 / 2, 1 / 2, 0],
        b_implicit=[0, 1 / 2, 1 / 2 - g, g],
        gsa=True,
        params={"gamma": g},
    )


def _dp1_a242() -> DoubleButcherTableau:
    # last implicit row stored as [3/2, -3/2, 1/2, 1/2] so that it sums to c_4 = 1
    ai = [
        [1 / 2, 0, 0, 0],
        [1 / 6, 1 / 2, 0, 0],
        [-1 / 2, 1 / 2, 1 / 2, 0],
        [3 / 2, -3 / 2, 1 / 2, 1 / 2],
    ]
    return DoubleButcherTableau(
        "DP1_A242",
        a_explicit=[[0, 0, 0, 0], [1 / 3, 0, 0, 0], [1, 0, 0, 0], [1 / 2, 0, 1 / 2, 0]],
        a_implicit=ai,
        b_explicit=[1 / 2, 0, 1 / 2, 0],
        b_implicit=ai[-1],
        gsa=True,
    )


_BUILTINS = {
    "ARS111": _ars111,
    "ARS222": _ars222,
    "ARS443": _ars443,
    "DP_A121": _dp_a121,
    "DP2_A242": _dp2_a242,
    "DP1_A242": _dp1_a242,
}

_GAMMA_SCHEMES = {"ARS222", "DP_A121", "DP2_A242"}


def builtin_names() -> list[str]:
    return list(_BUILTINS)


def builtin(name: str, gamma: float | None = None) -> DoubleButcherTableau:
    """Return one of the registered schemes.

    ``gamma`` overrides the free parameter of ARS222, DP_A121 and DP2_A242.
    """
    key = name.upper().replace("-", "_")
    if key not in _BUILTINS:
        raise TableauError(
            f"unknown tableau {name!r}; available: {', '.join(builtin_names())}"
        )
    if gamma is not None:
        if key not in _GAMMA_SCHEMES:
            raise TableauError(f"{key} has no free parameter gamma")
        return _BUILTINS[key](gamma)
    return _BUILTINS[key]()


# ---------------------------------------------------------------------------
# plain-text format
#
#   name = MYSCHEME
#   s = 2
#   a_explicit = 0 0  1 0          # row-major, s*s numbers
#   a_implicit = 1/2 0  1/2 1/2
#   b_explicit = 1 0
#   b_implicit = 1/2 1/2
#   gsa = true
#
# c_explicit / c_implicit are optional.  Numbers may be written as fractions.


def _parse_number(tok: str) -> float:
    try:
        return float(Fraction(tok))
    except (ValueError, ZeroDivisionError) as exc:
        raise TableauError(f"cannot parse coefficient {tok!r}") from exc


def _parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TableauError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip().lower()] = val.strip()
    return out


def load_tableau(path: str | Path) -> DoubleButcherTableau:
    kv = _parse_kv(Path(path).read_text())
    for key in ("name", "s", "a_explicit", "a_implicit", "b_explicit", "b_implicit"):
        if key not in kv:
            raise TableauError(f"{path}: missing key {key!r}")
    s = int(kv["s"])

    def vec(key, n):
        vals = [_parse_number(t) for t in kv[key].replace(",", " ").split()]
        if len(vals) != n:
            raise TableauError(f"{path}: {key} needs {n} numbers, got {len(vals)}")
        return np.array(vals)

    t = DoubleButcherTableau(
        kv["name"],
        a_explicit=vec("a_explicit", s * s).reshape(s, s),
        a_implicit=vec("a_implicit", s * s).reshape(s, s),
        b_explicit=vec("b_explicit", s),
        b_implicit=vec("b_implicit", s),
        c_explicit=vec("c_explicit", s) if "c_explicit" in kv else None,
        c_implicit=vec("c_implicit", s) if "c_implicit" in kv else None,
        gsa=kv.get("gsa", "false").lower() in ("1", "true", "yes"),
    )
    return t


def dump_tableau(t: DoubleButcherTableau) -> str:
    def fmt(a):
        return " ".join(repr(float(x)) for x in np.ravel(a))

    lines = [
        f"name = {t.name}",
        f"s = {t.s}",
        f"a_explicit = {fmt(t.a_explicit)}",
        f"a_implicit = {fmt(t.a_implicit)}",
        f"b_explicit = {fmt(t.b_explicit)}",
        f"b_implicit = {fmt(t.b_implicit)}",
        f"c_explicit = {fmt(t.c_explicit)}",
        f"c_implicit = {fmt(t.c_implicit)}",
        f"gsa = {'true' if t.gsa else 'false'}",
    ]
    return "\n".join(lines) + "\n"
