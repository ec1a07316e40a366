"""Experiment configuration read from INI files.

All keys live in an ``[experiment]`` section; list-valued keys take
comma-separated values.  Missing keys fall back to defaults that depend on
the geometry (periodic or inflow).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from apmm.periodic import ConfigError
from apmm.tableau import builtin_names

__all__ = ["MODELS", "ConfigError", "ExperimentConfig", "load_config", "parse_overrides"]

MODELS = ("micromacro", "advdiff", "inflow", "bgk", "diffusion", "advdiff-limit")
INITS = ("WP", "N-WP")
BOUNDARIES = ("equilibrium", "scaled-velocity", "custom")


_PERIODIC = dict(length=2 * math.pi, n_x=[50], t_final=0.5, dt=[0.1, 0.05, 0.01, 0.005, 0.001])
_INFLOW = dict(length=2.0, n_x=[20], t_final=0.1, dt=[0.1, 0.05, 0.01, 0.005, 0.001])


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "micromacro"
    geometry: str | None = None
    tableau: list = field(default_factory=lambda: ["DP1_A242"])
    eps: list = field(default_factory=lambda: [1.0, 1e-4])
    dt: list | None = None
    n_x: list | None = None
    t_final: float | None = None
    length: float | None = None
    v_max: float = 5.0
    dv: float = 1.0
    init: str = "N-WP"
    profile: str = "cos"
    boundary: str = "equilibrium"
    boundary_value: float = 1.0
    boundary_file: str | None = None
    drift: float = 0.5
    staggered: bool = False
    upwind_order: int = 3
    central_order: int | None = None
    reference: str = "self"
    reference_dt: float = 1e-4
    reference_n_x: int = 120
    output: str = "out"
    snapshot_every: int | None = None
    workers: int = 1
    backend: str | None = None
    plot: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        geo = self.geometry or ("inflow" if self.model == "inflow" else "periodic")
        if geo not in ("periodic", "inflow"):
            raise ConfigError(f"geometry must be 'periodic' or 'inflow', got {geo!r}")
        if self.model in ("micromacro", "advdiff", "advdiff-limit") and geo != "periodic":
            raise ConfigError(f"model {self.model} runs on the periodic geometry only")
        if self.model == "inflow" and geo != "inflow":
            raise ConfigError("model inflow needs the inflow geometry")
        object.__setattr__(self, "geometry", geo)
        if self.central_order is None:
            object.__setattr__(self, "central_order", 2 if self.staggered else 4)
        defaults = _INFLOW if geo == "inflow" else _PERIODIC
        for key, val in defaults.items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, val)
        for key in ("tableau", "eps", "dt", "n_x"):
            if not getattr(self, key):
                raise ConfigError(f"{key} list must not be empty")
        known = builtin_names()
        for name in self.tableau:
            if name not in known:
                raise ConfigError(f"unknown tableau {name!r}; available: {', '.join(known)}")
        if any(not e > 0 for e in self.eps):
            raise ConfigError("every eps must be positive")
        if any(not d > 0 for d in self.dt):
            raise ConfigError("every dt must be positive")
        if any(n < 5 for n in self.n_x):
            raise ConfigError("every n_x must be at least 5")
        if self.t_final < 0:
            raise ConfigError("t_final must be non-negative")
        if self.init not in INITS:
            raise ConfigError(f"init must be one of {INITS}, got {self.init!r}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.boundary == "custom" and not self.boundary_file:
            raise ConfigError("custom boundary data needs boundary_file")
        if self.reference not in ("self", "diffusion"):
            raise ConfigError("reference must be 'self' or 'diffusion'")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.model == "advdiff":
            bad = [e for e in self.eps if abs(e * self.drift) >= 1]
            if bad:
                raise ConfigError(f"|eps A| must be < 1; violated for eps={bad}")

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


_LISTS = {"tableau": str, "eps": float, "dt": float, "n_x": int}
_BOOLS = {"staggered", "plot"}


def _convert(key: str, raw: str):
    if key not in {f.name for f in fields(ExperimentConfig)}:
        raise ConfigError(f"unknown configuration key {key!r}")
    raw = raw.strip()
    try:
        if key in _LISTS:
            return [_LISTS[key](tok.strip()) for tok in raw.split(",") if tok.strip()]
        if key in _BOOLS:
            low = raw.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("1", "true", "yes", "on")
        if key in ("upwind_order", "central_order", "reference_n_x", "workers"):
            return int(raw)
        if key == "snapshot_every":
            return int(raw) if raw.lower() not in ("", "none") else None
        if key in ("t_final", "length", "v_max", "dv", "boundary_value", "drift", "reference_dt"):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw if raw.lower() != "none" else None


def parse_overrides(pairs) -> dict:
    """``['key=value', ...]`` to typed keyword arguments."""
    out = {}
    for item in pairs or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key = key.strip().replace("-", "_")
        out[key] = _convert(key, val)
    return out


def load_config(path: str | Path | None = None, defaults: dict | None = None,
                **overrides) -> ExperimentConfig:
    """File values win over ``defaults``; keyword overrides win over both."""
    values = dict(defaults or {})
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise ConfigError(f"cannot read configuration file {path}")
        if "experiment" not in parser:
            raise ConfigError(f"{path}: missing [experiment] section")
        for key, raw in parser["experiment"].items():
            values[key.replace("-", "_")] = _convert(key.replace("-", "_"), raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
