"""Acceptance suite: numbered criteria with pass/fail verdicts.

Each criterion function returns a :class:`CriterionResult`; :func:`run_criteria`
runs a selection and the command line ``check`` subcommand reports them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from apmm import collision as col
from apmm import reference as ref
from apmm import stencils as st
from apmm.analysis import ap_residual, limit_scheme_check, observed_order, pi_tensor_eval
from apmm.config import ExperimentConfig
from apmm.experiments import final_density, space_study, time_study
from apmm.inflow import InflowConfig, InflowSolver, inflow_limit_step, step_inflow_first_order
from apmm.periodic import MicroMacroSolver, RunConfig, init_non_well_prepared, init_well_prepared
from apmm.tableau import builtin, builtin_names, validate
from apmm.velocity import VelocityGrid

__all__ = ["CriterionResult", "CRITERIA", "run_criteria", "format_result"]

TYPE_A = ("DP_A121", "DP2_A242", "DP1_A242")


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: str
    seconds: float = 0.0


def format_result(r: CriterionResult) -> str:
    verdict = "PASS" if r.passed else "FAIL"
    return f"criterion {r.number:2d} [{verdict}] {r.title}: {r.details} ({r.seconds:.1f}s)"


def _rel(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - b)) / np.max(np.abs(b)))


def _within(value, target, tol) -> bool:
    return abs(value - target) <= tol


def _slopes(cases, base: ExperimentConfig, tol=0.3):
    """Time studies for ``(tableau, eps, init, target)`` cases."""
    ok, parts = True, []
    for name, eps, init, target in cases:
        study = time_study(base.with_overrides(init=init), name, eps)
        slope = study.slope
        good = _within(slope, target, tol)
        ok &= good
        parts.append(f"{name}/{init}/eps={eps:g}: {slope:.2f} (want {target}){'' if good else ' !'}")
    return ok, "; ".join(parts)


# --- 1-3: diffusion scaling, time order --------------------------------------------
def _diffusion_time_config(**kw) -> ExperimentConfig:
    return ExperimentConfig(model="micromacro", profile="cos", n_x=[50], t_final=0.5,
                            dt=[0.1, 0.05, 0.01, 0.005, 0.001], reference_dt=1e-4, **kw)


def criterion_1() -> CriterionResult:
    cases = []
    for eps in (1.0, 1e-4):
        cases += [("DP_A121", eps, "WP", 1), ("DP2_A242", eps, "WP", 2),
                  ("DP1_A242", eps, "WP", 2 if eps == 1.0 else 3),
                  ("ARS111", eps, "WP", 1), ("ARS222", eps, "WP", 2), ("ARS443", eps, "WP", 3)]
    ok, det = _slopes(cases, _diffusion_time_config())
    return CriterionResult(1, "time order, diffusion scaling", ok, det)


def criterion_2() -> CriterionResult:
    base = _diffusion_time_config(init="N-WP")
    ok, parts = True, []
    for name in ("ARS222", "ARS443"):
        slope = time_study(base, name, 1e-4).slope
        ok &= slope <= 1.3
        parts.append(f"{name}/N-WP/eps=1e-4: {slope:.2f} (want <= 1.3)")
    return CriterionResult(2, "CK-ARS order loss with non-well-prepared data", ok, "; ".join(parts))


def criterion_3() -> CriterionResult:
    cfg = _diffusion_time_config(init="WP", reference="diffusion")
    study = time_study(cfg, "ARS443", 1e-4)
    e = dict(zip(study.params, study.l2))
    ok = e[0.001] >= e[0.005] / 3
    det = f"e(0.005)={e[0.005]:.3e}, e(0.001)={e[0.001]:.3e}, ratio {e[0.005] / e[0.001]:.2f} (want <= 3)"
    return CriterionResult(3, "plateau against the diffusion reference", ok, det)


# --- 4: space order ------------------------------------------------------------------
def criterion_4() -> CriterionResult:
    cfg = ExperimentConfig(model="micromacro", init="WP", profile="cos", t_final=0.01, dt=[0.001],
                           n_x=[20, 24, 30, 40, 60], reference_n_x=120)
    ok, parts = True, []
    for name in ("DP1_A242", "ARS443"):
        for eps in (1e-4, 0.2, 1.0):
            slope = space_study(cfg, name, eps).slope
            good = _within(slope, 3, 0.3)
            ok &= good
            parts.append(f"{name}/eps={eps:g}: {slope:.2f}{'' if good else ' !'}")
    return CriterionResult(4, "space order (want 3 +- 0.3)", ok, "; ".join(parts))


# --- 5: advection-diffusion ---------------------------------------------------------
def criterion_5() -> CriterionResult:
    base = ExperimentConfig(model="advdiff", profile="sin", n_x=[20], t_final=0.5, staggered=True,
                            upwind_order=1, drift=0.5, dt=[0.5, 0.1, 0.05, 0.01, 0.005, 0.001])
    cases = [("DP1_A242", e, "N-WP", 2) for e in (1.0, 1e-4)]
    cases += [("ARS443", e, "WP", 3) for e in (1.0, 1e-4)]
    ok, det = _slopes(cases, base)
    return CriterionResult(5, "advection-diffusion time order", ok, det)


# --- 6: inflow ---------------------------------------------------------------------
def criterion_6() -> CriterionResult:
    base = ExperimentConfig(model="inflow", n_x=[20], t_final=0.1,
                            dt=[0.1, 0.05, 0.01, 0.005, 0.001], reference_dt=1e-4)
    cases = [("DP_A121", 1.0, "N-WP", 1), ("DP_A121", 1e-4, "N-WP", 1),
             ("DP1_A242", 1.0, "N-WP", 2), ("DP1_A242", 1e-4, "N-WP", 3)]
    ok, det = _slopes(cases, base)
    return CriterionResult(6, "inflow time order", ok, det)


# --- 7: AP residual ----------------------------------------------------------------
def criterion_7() -> CriterionResult:
    eps_list = [1e-3, 1e-4, 1e-5]
    ok, parts = True, []
    for name in TYPE_A:
        res = []
        for eps in eps_list:
            rc = RunConfig(builtin(name), eps, 0.01, 0.01, n_x=50)
            solver = MicroMacroSolver(rc)
            out = solver.step(init_non_well_prepared(rc, lambda x: 1 + np.cos(x)))
            res.append(ap_residual(out.rho, out.g, eps, rc.collision, solver.cen_g))
        slope = observed_order(res, eps_list, drop_preasymptotic=False).slope
        good = _within(slope, 2, 0.2)
        ok &= good
        parts.append(f"{name}: {slope:.2f}{'' if good else ' !'}")
    return CriterionResult(7, "AP residual slope in eps (want 2 +- 0.2)", ok, "; ".join(parts))


# --- 8: asymptotic equivalence ------------------------------------------------------
def criterion_8() -> CriterionResult:
    eps, dt, tol = 1e-8, 0.01, 1e-6
    worst = {}
    for name in TYPE_A:
        t = builtin(name)
        rc = RunConfig(t, eps, dt, dt, n_x=50)
        k = col.kappa(rc.collision)
        for prep in (init_non_well_prepared, init_well_prepared):
            s0 = prep(rc, lambda x: 1 + np.cos(x))
            mm = MicroMacroSolver(rc).step(s0).rho
            lim = ref.diffusion_implicit_step(s0.rho, dt, t, k, ref.periodic_laplacian(50))
            worst["diffusion"] = max(worst.get("diffusion", 0.0), _rel(mm, lim))
        rc = RunConfig(t, eps, dt, dt, n_x=20, upwind_order=1, central_order=2, staggered=True, drift=0.5)
        s0 = init_non_well_prepared(rc, np.sin)
        mm = MicroMacroSolver(rc).step(s0).rho
        grad = st.central(2, "rho", rc.dx).matrix(20) @ st.average(True).matrix(20)
        lim = ref.advdiff_limit_step(s0.rho, dt, t, k, 0.5, ref.periodic_laplacian(20, staggered=True), grad)
        worst["advdiff"] = max(worst.get("advdiff", 0.0), _rel(mm, lim))
    ic = InflowConfig(builtin("DP_A121"), eps, dt, dt)
    s0 = InflowSolver(ic).initial_state(rho_bar=np.linspace(1.0, 0.0, ic.n_x - 2))
    worst["inflow"] = _rel(step_inflow_first_order(ic, s0).rho, inflow_limit_step(ic, s0.rho))
    ok = all(v <= tol for v in worst.values())
    det = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (want <= {tol:g})"
    return CriterionResult(8, "one-step equivalence with the limit schemes at eps=1e-8", ok, det)


# --- 9: Pi tensors -----------------------------------------------------------------
def criterion_9(draws: int = 100, seed: int = 0) -> CriterionResult:
    L = col.bgk(VelocityGrid(3.0, 6))
    rng = np.random.default_rng(seed)
    rec = van = alt = 0.0
    for name in TYPE_A:
        t = builtin(name)
        s = t.s
        for _ in range(draws):
            gr = rng.standard_normal((s, 8))
            ar = rng.standard_normal((s, 8))
            for j in range(2, s + 1):
                for m in range(2, j + 1):
                    lhs = pi_tensor_eval(t, j, j, m, gr, ar, L).value
                    rhs = sum(pi_tensor_eval(t, j, k, m - 1, gr, ar, L).value for k in range(1, j))
                    rec = max(rec, float(np.max(np.abs(lhs - rhs))))
                for k1 in range(1, j):
                    van = max(van, float(np.max(np.abs(pi_tensor_eval(t, j, k1, j, gr, ar, L).value))))
            alt = max(alt, limit_scheme_check(t, gr, ar, L))
    ok = max(rec, van, alt) <= 1e-12
    det = f"recurrence {rec:.1e}, vanishing {van:.1e}, alternating sum {alt:.1e} (want <= 1e-12)"
    return CriterionResult(9, "Pi tensor identities", ok, det)


# --- 10: structural invariants ------------------------------------------------------
def _stencil_orders():
    """Observed orders of every stencil on ``sin`` under refinement."""
    out = {}
    ns = [20, 40, 80, 160]

    def order(make, shift_in=0.0, shift_out=0.0):
        errs = []
        for n in ns:
            dx = 2 * np.pi / n
            x = np.arange(n) * dx
            d = make(dx).apply(np.sin(x + shift_in * dx)) - np.cos(x + shift_out * dx)
            errs.append(np.max(np.abs(d)))
        return observed_order(errs, [1 / n for n in ns], drop_preasymptotic=False).slope

    for p in (1, 3):
        for i, side in enumerate("-+"):
            out[f"upwind{p}{side}"] = (order(lambda dx: st.upwind_pair(p, dx)[i]), p)
    for p in (2, 4):
        out[f"central{p}"] = (order(lambda dx: st.central(p, "colocated", dx)), p)
    out["staggered g"] = (order(lambda dx: st.central(2, "g", dx), shift_out=0.5), 2)
    out["staggered rho"] = (order(lambda dx: st.central(2, "rho", dx), shift_in=0.5), 2)
    return out


def criterion_10() -> CriterionResult:
    problems = []
    # zero bracket and mass over full runs
    bracket = mass = 0.0
    for staggered in (False, True):
        for eps in (1.0, 1e-4):
            kw = dict(upwind_order=1, central_order=2, staggered=True) if staggered else {}
            rc = RunConfig(builtin("DP1_A242"), eps, 0.01, 0.5, n_x=40, **kw)
            res = MicroMacroSolver(rc).run(init_non_well_prepared(rc, lambda x: 1 + np.cos(x)), 5)
            bracket = max(bracket, max(res.max_bracket))
            mass = max(mass, float(np.max(np.abs(np.array(res.mass) - res.mass[0]))))
    if bracket > 1e-9:
        problems.append(f"bracket {bracket:.1e}")
    if mass > 1e-10:
        problems.append(f"mass {mass:.1e}")
    bad = {n: validate(builtin(n)) for n in builtin_names()}
    bad = {n: p for n, p in bad.items() if p}
    if bad:
        problems.append(f"invalid tableaux {sorted(bad)}")
    orders = _stencil_orders()
    off = {k: v for k, (v, want) in orders.items() if abs(v - want) > 0.2}
    if off:
        problems.append("stencil orders " + ", ".join(f"{k}={v:.2f}" for k, v in off.items()))
    grid = VelocityGrid(5.0, 10)
    h = np.random.default_rng(1).standard_normal((7, grid.n_v))
    idem = max(
        float(np.max(np.abs(grid.project_pi(grid.project_pi(h)) - grid.project_pi(h)))),
        float(np.max(np.abs(grid.project_pi_minus(grid.project_pi_minus(h)) - grid.project_pi_minus(h)))),
    )
    if idem > 1e-13:
        problems.append(f"projection idempotence {idem:.1e}")
    det = (f"bracket {bracket:.1e}, mass {mass:.1e}, {len(builtin_names())} tableaux checked, "
           f"stencil orders {min(v for v, _ in orders.values()):.2f}..{max(v for v, _ in orders.values()):.2f}, "
           f"idempotence {idem:.1e}")
    if problems:
        det += "; failing: " + "; ".join(problems)
    return CriterionResult(10, "structural invariants", not problems, det)


# --- 11: qualitative regimes -------------------------------------------------------
def criterion_11() -> CriterionResult:
    checks = {}
    per = ExperimentConfig(model="micromacro", init="N-WP", profile="cos", t_final=0.5, n_x=[20])
    _, mm = final_density(per, "DP1_A242", 1.0, 0.005, 20)
    _, bgk = final_density(per, "DP1_A242", 1.0, 0.005, 20, model="bgk")
    checks["periodic MM/BGK eps=1"] = (_rel(mm, bgk), 2e-2)
    _, mm = final_density(per, "DP1_A242", 1e-4, 0.005, 20)
    _, dif = final_density(per, "DP1_A242", 1e-4, 0.005, 20, model="diffusion")
    checks["periodic MM/diffusion eps=1e-4"] = (_rel(mm, dif), 1e-2)

    inf = ExperimentConfig(model="inflow", t_final=0.1, n_x=[40])
    _, mm = final_density(inf, "DP1_A242", 1.0, 0.001, 40)
    _, bgk = final_density(inf, "DP1_A242", 1.0, 0.001, 40, model="bgk")
    checks["inflow MM/BGK eps=1"] = (_rel(mm, bgk), 2e-2)
    _, mm = final_density(inf, "DP1_A242", 1e-4, 0.001, 40)
    _, dif = final_density(inf, "DP1_A242", 1e-4, 0.001, 40, model="diffusion")
    checks["inflow MM/diffusion eps=1e-4"] = (_rel(mm, dif), 1e-2)

    neq = inf.with_overrides(boundary="scaled-velocity")
    x, mm = final_density(neq, "DP1_A242", 1e-4, 0.001, 40)
    _, dif = final_density(neq, "DP1_A242", 1e-4, 0.001, 40, model="diffusion")
    dev = np.abs(mm - dif)
    ratio = float(dev[0] / dev[x >= 0.3].max())

    ok = all(v <= tol for v, tol in checks.values()) and ratio >= 5
    parts = [f"{k} {v:.1e} (<= {tol:g}){'' if v <= tol else ' !'}" for k, (v, tol) in checks.items()]
    parts.append(f"boundary layer ratio {ratio:.2f} (>= 5){'' if ratio >= 5 else ' !'}")
    return CriterionResult(11, "qualitative regime agreement", ok, "; ".join(parts))


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criteria(numbers=None, report=None) -> list[CriterionResult]:
    """Run the selected criteria (all by default); ``report`` gets each result as it finishes."""
    out = []
    for n in sorted(numbers or CRITERIA):
        if n not in CRITERIA:
            raise KeyError(f"no criterion {n}; choose from 1-{max(CRITERIA)}")
        t0 = time.perf_counter()
        r = CRITERIA[n]()
        r.seconds = time.perf_counter() - t0
        out.append(r)
        if report:
            report(r)
    return out
