"""Pure numpy implementation of the periodic time loop.

Same signature and semantics as the compiled ``_kernels.run_periodic``;
selected automatically when the extension is not built.
"""

import numpy as np
from scipy.linalg import lu_solve


def _apply(sten, u):
    offsets, coeffs = sten
    out = np.zeros_like(u)
    for o, c in zip(offsets, coeffs):
        out += c * np.roll(u, -int(o), axis=0)
    return out


def run_periodic(rho0, g0, n_steps, *, eps, dt, drift, a_exp, a_imp, res, lu, piv,
                 flux_w, r_vm, lmat, v, weights, m, upw_minus, upw_plus, cen_rho,
                 cen_g, avg):
    s = a_imp.shape[0]
    vp = 0.5 * (v + np.abs(v))
    vn = 0.5 * (v - np.abs(v))
    vm = v * m
    vw = v * weights
    rho = np.array(rho0, dtype=float)
    g = np.array(g0, dtype=float)
    for _ in range(n_steps):
        grad, av, tr, lg, fl = [], [], [], [], []
        for j in range(s):
            a = a_imp[j, j]
            y = eps * g
            gsum = np.zeros_like(rho)
            dsum = np.zeros_like(rho)
            for k in range(j):
                y = y - dt * a_exp[j, k] * tr[k] + (dt / eps) * a_imp[j, k] * lg[k]
                gsum = gsum + a_imp[j, k] * grad[k]
                dsum = dsum + a_exp[j, k] * av[k]
            y = y + np.multiply.outer(dt * (drift * dsum - gsum), vm)
            q = a * dt * (y @ flux_w[j])
            for k in range(j):
                q = q + a_imp[j, k] * (dt / eps) * fl[k]
            rho_j = lu_solve((lu[j], piv[j]), rho - _apply(cen_rho, q))
            grad_j = _apply(cen_g, rho_j)
            g_j = eps * (y @ res[j].T) - np.multiply.outer(eps * dt * a * grad_j, r_vm[j])
            grad.append(grad_j)
            av.append(_apply(avg, rho_j))
            t = vp * _apply(upw_minus, g_j) + vn * _apply(upw_plus, g_j)
            tr.append(t - np.multiply.outer(t @ weights, m))
            lg.append(g_j @ lmat.T)
            fl.append(g_j @ vw)
        rho, g = rho_j, g_j
    return rho, g
