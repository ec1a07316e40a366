"""Independent reference implementations used by the tests."""

import numpy as np


def monolithic_step(solver, state):
    """One IMEX step assembled as a coupled (rho, g) linear system per stage.

    Uses only the stage equations in unreduced form: no resolvent, no
    elimination of ``g``.
    """
    c = solver.config
    grid = c.velocity
    nx, nv = c.n_x, grid.n_v
    ae, ai = c.tableau.a_explicit, c.tableau.a_implicit
    eps, dt, A = c.eps, c.dt, c.drift
    Gr = solver.cen_rho.matrix(nx)
    Gg = solver.cen_g.matrix(nx)
    Av = solver.avg.matrix(nx)
    Um = solver.upw_minus.matrix(nx)
    Up = solver.upw_plus.matrix(nx)
    Q = np.eye(nv) - grid.pi_matrix
    T = np.kron(Um, Q @ np.diag(grid.v_plus)) + np.kron(Up, Q @ np.diag(grid.v_minus))
    Lop = np.kron(np.eye(nx), c.collision.matrix)
    flux = np.kron(np.eye(nx), (grid.v * grid.weights)[None, :])
    src = np.kron(Gg, grid.vM[:, None])
    drift = np.kron(Av, grid.vM[:, None])
    n2 = nx * nv
    rhos, gs = [], []
    gn = state.g.ravel()
    for j in range(c.tableau.s):
        a = ai[j, j]
        M = np.zeros((nx + n2, nx + n2))
        b = np.zeros(nx + n2)
        M[:nx, :nx] = np.eye(nx)
        M[:nx, nx:] = a * (dt / eps) * Gr @ flux
        b[:nx] = state.rho - sum(ai[j, k] * (dt / eps) * Gr @ flux @ gs[k] for k in range(j))
        M[nx:, nx:] = np.eye(n2) - a * (dt / eps**2) * Lop
        M[nx:, :nx] = a * (dt / eps) * src
        rhs = gn.copy()
        for k in range(j):
            rhs += (-ae[j, k] * (dt / eps) * T @ gs[k] - ai[j, k] * (dt / eps) * src @ rhos[k]
                    + ai[j, k] * (dt / eps**2) * Lop @ gs[k] + ae[j, k] * (dt / eps) * A * drift @ rhos[k])
        b[nx:] = rhs
        x = np.linalg.solve(M, b)
        rhos.append(x[:nx])
        gs.append(x[nx:])
    return rhos[-1], gs[-1].reshape(nx, nv)
