"""Command line interface: ``apmm <subcommand> [--config FILE] [key=value ...]``.

Exit codes: 0 success, 1 configuration error, 2 solver failure,
3 acceptance failure (``check`` only).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from apmm import __version__
from apmm import experiments as ex
from apmm.config import ConfigError, load_config, parse_overrides
from apmm.io import write_convergence, write_profiles
from apmm.periodic import SolverError
from apmm.tableau import TableauError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_ACCEPTANCE = 0, 1, 2, 3

SPACE_DEFAULTS = dict(n_x=[20, 24, 30, 40, 60], t_final=0.01, dt=[0.001])


def _metadata(cfg, **extra) -> dict:
    return {"apmm_version": __version__, "config": cfg.to_dict(), **extra}


def _tag(*parts) -> str:
    return "_".join(str(p).replace("/", "-") for p in parts)


def _load(args, defaults=None):
    overrides = parse_overrides(args.overrides)
    for key in ("workers", "output", "backend"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if getattr(args, "plot", False):
        overrides["plot"] = True
    return load_config(args.config, defaults=defaults, **overrides)


def cmd_run(cfg) -> int:
    out = Path(cfg.output)
    dt, n_x = cfg.dt[0], cfg.n_x[0]
    written = []
    for name in cfg.tableau:
        for eps in cfg.eps:
            x, snaps = ex.run_model(cfg, name, eps, dt, n_x)
            path = out / f"{_tag(cfg.model, name, f'eps{eps:g}', f'dt{dt:g}', f'nx{n_x}')}.csv"
            write_profiles(path, x, snaps, _metadata(cfg, tableau=name, eps=eps, dt=dt, n_x=n_x))
            written.append(path)
            print(f"{path}: {len(snaps)} snapshots")
    if cfg.plot:
        from apmm.plotting import plot_profiles

        plot_profiles(written, out / f"{cfg.model}_profiles.svg")
    return EXIT_OK


def _convergence(cfg, kind: str) -> int:
    fn = ex.time_study if kind == "time" else ex.space_study
    tasks = [(cfg, name, eps) for name in cfg.tableau for eps in cfg.eps]
    studies = ex.sweep(fn, tasks, cfg.workers, key=lambda a: (a[1], a[2]))
    path = Path(cfg.output) / f"convergence_{kind}_{cfg.model}.csv"
    write_convergence(path, studies, _metadata(cfg, study=kind))
    for s in studies:
        print(f"{s.scheme:10s} eps={s.eps:<8g} slope {s.slope:6.2f}  (reference {s.reference})")
    print(path)
    if cfg.plot:
        from apmm.plotting import plot_convergence

        plot_convergence(path, path.with_suffix(".svg"))
    return EXIT_OK


def cmd_compare(cfg) -> int:
    out = Path(cfg.output)
    dt, n_x = cfg.dt[0], cfg.n_x[0]
    for name in cfg.tableau:
        for eps in cfg.eps:
            results = ex.compare_models(cfg, name, eps, dt, n_x)
            paths = []
            for model, (x, rho) in results.items():
                path = out / f"compare_{_tag(model, name, f'eps{eps:g}')}.csv"
                write_profiles(path, x, [(cfg.t_final, rho)],
                               _metadata(cfg, model=model, tableau=name, eps=eps, dt=dt, n_x=n_x))
                paths.append(path)
            base = next(iter(results.values()))[1]
            gaps = ", ".join(
                f"{m} {np.max(np.abs(r - base)) / np.max(np.abs(base)):.2e}"
                for m, (_, r) in list(results.items())[1:]
            )
            print(f"{name} eps={eps:g}: relative max gap to {next(iter(results))}: {gaps}")
            if cfg.plot:
                from apmm.plotting import plot_profiles

                plot_profiles(paths, out / f"compare_{_tag(name, f'eps{eps:g}')}.svg",
                              title=f"{name}, eps={eps:g}")
    return EXIT_OK


def cmd_check(criteria) -> int:
    from apmm.acceptance import format_result, run_criteria

    results = run_criteria(criteria, report=lambda r: print(format_result(r), flush=True))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failing: {failed}" if failed else ""))
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apmm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"apmm {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("run", "run the configured model and write profile snapshots"),
        ("convergence-time", "time convergence study against a fine-step reference"),
        ("convergence-space", "space convergence study against a fine-grid reference"),
        ("compare", "micro-macro, kinetic and limit models on one scenario"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="INI file with an [experiment] section")
        p.add_argument("--output", help="output directory")
        p.add_argument("--workers", type=int, help="processes for sweeps")
        p.add_argument("--backend", choices=["compiled", "python"], help="kernel backend")
        p.add_argument("--plot", action="store_true", help="also write SVG figures")
        p.add_argument("overrides", nargs="*", metavar="key=value", help="configuration overrides")
    p = sub.add_parser("check", help="run the acceptance criteria")
    p.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "check":
            try:
                nums = [int(n) for n in args.criteria.split(",")] if args.criteria else None
            except ValueError as exc:
                raise ConfigError(f"bad criterion list {args.criteria!r}") from exc
            return cmd_check(nums)
        if args.command == "convergence-space":
            return _convergence(_load(args, SPACE_DEFAULTS), "space")
        cfg = _load(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "convergence-time":
            return _convergence(cfg, "time")
        return cmd_compare(cfg)
    except (ConfigError, TableauError, KeyError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
