"""SVG figures from the CSV outputs.  Needs matplotlib (the ``plot`` extra)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from apmm.io import read_profiles, read_table


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("plotting needs matplotlib; install apmm[plot]") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_profiles(csv_paths, out_path, title: str = "") -> Path:
    """Overlay the last snapshot of each profile file."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in csv_paths:
        _, x, snaps = read_profiles(path)
        t, rho = snaps[-1]
        ax.plot(x, rho, marker=".", label=f"{Path(path).stem} (t={t:g})")
    ax.set_xlabel("x")
    ax.set_ylabel("rho")
    ax.set_title(title)
    ax.legend(fontsize="small")
    out = Path(out_path)
    fig.savefig(out, format="svg", bbox_inches="tight")
    plt.close(fig)
    return out


def plot_convergence(csv_path, out_path) -> Path:
    """Log-log error curves, one per (scheme, eps)."""
    plt = _pyplot()
    _, cols = read_table(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    keys = list(dict.fromkeys(zip(cols["scheme"], np.asarray(cols["eps"]).tolist())))
    for scheme, eps in keys:
        sel = [i for i, k in enumerate(zip(cols["scheme"], cols["eps"])) if k == (scheme, eps)]
        p = np.asarray(cols["param"])[sel]
        e = np.asarray(cols["L2_error"])[sel]
        slope = np.asarray(cols["fitted_slope"])[sel][0]
        ax.loglog(p, e, marker="o", label=f"{scheme} eps={eps:g} (slope {slope:.2f})")
    ax.set_xlabel("parameter")
    ax.set_ylabel("L2 error")
    ax.legend(fontsize="small")
    out = Path(out_path)
    fig.savefig(out, format="svg", bbox_inches="tight")
    plt.close(fig)
    return out
