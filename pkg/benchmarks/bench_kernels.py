"""Time the compiled and pure-Python periodic kernels on the same runs.

    python3 benchmarks/bench_kernels.py [--steps 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from apmm.kernels import available_backends
from apmm.periodic import MicroMacroSolver, RunConfig, init_non_well_prepared
from apmm.tableau import builtin

CASES = [
    ("DP1_A242 colocated n_x=50", dict(n_x=50)),
    ("ARS443 colocated n_x=120", dict(n_x=120)),
    ("DP1_A242 staggered n_x=50", dict(n_x=50, staggered=True, upwind_order=1, central_order=2, drift=0.5)),
]


def bench(name, kw, steps, repeat):
    tableau = name.split()[0]
    cfg = RunConfig(builtin(tableau), 1.0, 1e-3, steps * 1e-3, **kw)
    solver = MicroMacroSolver(cfg)
    state = init_non_well_prepared(cfg, lambda x: 1 + np.cos(x))
    times, finals = {}, {}
    for backend in available_backends():
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            res = solver.run(state, backend=backend)
            best = min(best, time.perf_counter() - t0)
        times[backend], finals[backend] = best, res.final.rho
    line = f"{name:30s}" + "".join(f"  {b} {t * 1e3:8.1f} ms" for b, t in times.items())
    if len(times) == 2:
        gap = np.max(np.abs(finals["compiled"] - finals["python"]))
        line += f"  speedup {times['python'] / times['compiled']:5.1f}x  max diff {gap:.1e}"
    print(line)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    print(f"backends: {', '.join(available_backends())}; {args.steps} steps, best of {args.repeat}")
    for name, kw in CASES:
        bench(name, kw, args.steps, args.repeat)


if __name__ == "__main__":
    main()
