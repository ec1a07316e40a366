"""CSV output with a commented metadata header.

Floats are written with ``repr`` so that reading a file back reproduces
the arrays bit for bit.  Metadata lines look like ``# key: <json>``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

__all__ = [
    "PROFILE_COLUMNS",
    "CONVERGENCE_COLUMNS",
    "write_table",
    "read_table",
    "write_profiles",
    "read_profiles",
    "write_convergence",
]

PROFILE_COLUMNS = ("t", "x", "rho")
CONVERGENCE_COLUMNS = ("scheme", "eps", "param", "L2_error", "Linf_error", "fitted_slope")


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _parse(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_table(path, columns, rows, metadata: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for key, val in (metadata or {}).items():
            fh.write(f"# {key}: {json.dumps(val, sort_keys=True, default=str)}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in _values(row, columns)])
    return path


def _values(row, columns):
    return [row[c] for c in columns] if isinstance(row, dict) else list(row)


def read_table(path):
    """Return ``(metadata, columns)``; numeric columns come back as arrays."""
    meta, lines = {}, []
    with Path(path).open(newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, val = line[2:].partition(": ")
                meta[key] = json.loads(val)
            else:
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    data = {c: [] for c in header}
    for row in reader:
        for c, v in zip(header, row):
            data[c].append(_parse(v))
    out = {}
    for c, vals in data.items():
        if vals and all(isinstance(v, (int, float)) for v in vals):
            out[c] = np.array(vals, dtype=float)
        else:
            out[c] = vals
    return meta, out


def write_profiles(path, x, snapshots, metadata: dict | None = None) -> Path:
    """Long-format ``t, x, rho`` table from ``[(t, rho), ...]``."""
    x = np.asarray(x, dtype=float)
    rows = []
    for t, rho in snapshots:
        rho = np.asarray(rho, dtype=float)
        if rho.shape != x.shape:
            raise ValueError("snapshot and grid sizes differ")
        rows.extend((float(t), float(xi), float(r)) for xi, r in zip(x, rho))
    return write_table(path, PROFILE_COLUMNS, rows, metadata)


def read_profiles(path):
    """Inverse of :func:`write_profiles`: ``(metadata, x, [(t, rho), ...])``."""
    meta, cols = read_table(path)
    t, x, rho = (np.asarray(cols[c], dtype=float) for c in PROFILE_COLUMNS)
    times = list(dict.fromkeys(t.tolist()))
    snaps = [(tt, rho[t == tt]) for tt in times]
    grid = x[t == times[0]] if times else x
    return meta, grid, snaps


def write_convergence(path, studies, metadata: dict | None = None) -> Path:
    rows = [r for s in studies for r in s.rows()]
    return write_table(path, CONVERGENCE_COLUMNS, rows, metadata)
