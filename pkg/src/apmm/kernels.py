"""Backend selection for the hot time loops.

The compiled extension is used when it imports; otherwise the numpy
fallback takes over.  ``APMM_BACKEND=python`` (or ``compiled``) forces a
choice at import time.
"""

from __future__ import annotations

import os
from types import ModuleType

from apmm import _kernels_py

try:
    from apmm import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

__all__ = ["get_backend", "available_backends", "default_backend"]


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def _select() -> str:
    forced = os.environ.get("APMM_BACKEND", "").strip().lower()
    if forced in ("python", "py"):
        return "python"
    if forced == "compiled":
        if _compiled is None:
            raise ImportError("APMM_BACKEND=compiled but apmm._kernels is not built")
        return "compiled"
    return "compiled" if _compiled is not None else "python"


default_backend = _select()


def get_backend(name: str | None = None) -> ModuleType:
    name = default_backend if name is None else name
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled backend is not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}; choose from {available_backends()}")
