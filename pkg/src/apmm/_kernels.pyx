# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled periodic time loop.

Mirrors ``apmm._kernels_py.run_periodic``.  The stage density systems come
pre-factorized as LAPACK-style LU with 0-based row interchanges.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _stencil(const Py_ssize_t[::1] off, const double[::1] coef,
                          const double[::1] u, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0], i, p, idx
    for i in range(n):
        out[i] = 0.0
    for p in range(off.shape[0]):
        for i in range(n):
            idx = i + off[p]
            if idx < 0:
                idx += n
            elif idx >= n:
                idx -= n
            out[i] += coef[p] * u[idx]


cdef inline void _stencil2(const Py_ssize_t[::1] off, const double[::1] coef,
                           const double[:, ::1] u, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0], nv = u.shape[1], i, k, p, idx
    cdef double c
    for i in range(n):
        for k in range(nv):
            out[i, k] = 0.0
    for p in range(off.shape[0]):
        c = coef[p]
        for i in range(n):
            idx = i + off[p]
            if idx < 0:
                idx += n
            elif idx >= n:
                idx -= n
            for k in range(nv):
                out[i, k] += c * u[idx, k]


cdef inline void _lu_solve(const double[:, ::1] lu, const Py_ssize_t[::1] piv,
                           double[::1] b) noexcept nogil:
    cdef Py_ssize_t n = b.shape[0], i, k
    cdef double t
    for i in range(n):
        k = piv[i]
        if k != i:
            t = b[i]
            b[i] = b[k]
            b[k] = t
    for i in range(n):
        t = b[i]
        for k in range(i):
            t -= lu[i, k] * b[k]
        b[i] = t
    for i in range(n - 1, -1, -1):
        t = b[i]
        for k in range(i + 1, n):
            t -= lu[i, k] * b[k]
        b[i] = t / lu[i, i]


def run_periodic(rho0, g0, Py_ssize_t n_steps, *, double eps, double dt, double drift,
                 a_exp, a_imp, res, lu, piv, flux_w, r_vm, lmat, v, weights, m,
                 upw_minus, upw_plus, cen_rho, cen_g, avg):
    cdef const double[:, ::1] ae = np.ascontiguousarray(a_exp, dtype=np.float64)
    cdef const double[:, ::1] ai = np.ascontiguousarray(a_imp, dtype=np.float64)
    cdef const double[:, :, ::1] R = np.ascontiguousarray(res, dtype=np.float64)
    cdef const double[:, :, ::1] LU = np.ascontiguousarray(lu, dtype=np.float64)
    cdef const Py_ssize_t[:, ::1] PIV = np.ascontiguousarray(piv, dtype=np.intp)
    cdef const double[:, ::1] FW = np.ascontiguousarray(flux_w, dtype=np.float64)
    cdef const double[:, ::1] RVM = np.ascontiguousarray(r_vm, dtype=np.float64)
    cdef const double[:, ::1] Lm = np.ascontiguousarray(lmat, dtype=np.float64)
    cdef const double[::1] vel = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] M = np.ascontiguousarray(m, dtype=np.float64)
    cdef const Py_ssize_t[::1] um_o = np.ascontiguousarray(upw_minus[0], dtype=np.intp)
    cdef const double[::1] um_c = np.ascontiguousarray(upw_minus[1], dtype=np.float64)
    cdef const Py_ssize_t[::1] up_o = np.ascontiguousarray(upw_plus[0], dtype=np.intp)
    cdef const double[::1] up_c = np.ascontiguousarray(upw_plus[1], dtype=np.float64)
    cdef const Py_ssize_t[::1] cr_o = np.ascontiguousarray(cen_rho[0], dtype=np.intp)
    cdef const double[::1] cr_c = np.ascontiguousarray(cen_rho[1], dtype=np.float64)
    cdef const Py_ssize_t[::1] cg_o = np.ascontiguousarray(cen_g[0], dtype=np.intp)
    cdef const double[::1] cg_c = np.ascontiguousarray(cen_g[1], dtype=np.float64)
    cdef const Py_ssize_t[::1] av_o = np.ascontiguousarray(avg[0], dtype=np.intp)
    cdef const double[::1] av_c = np.ascontiguousarray(avg[1], dtype=np.float64)

    cdef Py_ssize_t s = ai.shape[0]
    cdef Py_ssize_t nx = np.shape(rho0)[0]
    cdef Py_ssize_t nv = vel.shape[0]
    cdef Py_ssize_t step, j, k, i, p, q
    cdef double a, cexp, cimp, acc, mean, gr, dv, eps_inv = 1.0 / eps

    rho_a = np.array(rho0, dtype=np.float64, order="C")
    g_a = np.array(g0, dtype=np.float64, order="C")
    cdef double[::1] rho = rho_a
    cdef double[:, ::1] g = g_a
    cdef double[:, ::1] rho_st = np.zeros((s, nx))
    cdef double[:, :, ::1] g_st = np.zeros((s, nx, nv))
    cdef double[:, ::1] grad = np.zeros((s, nx))
    cdef double[:, ::1] av = np.zeros((s, nx))
    cdef double[:, ::1] fl = np.zeros((s, nx))
    cdef double[:, :, ::1] tr = np.zeros((s, nx, nv))
    cdef double[:, :, ::1] lg = np.zeros((s, nx, nv))
    cdef double[:, ::1] y = np.zeros((nx, nv))
    cdef double[:, ::1] tmp = np.zeros((nx, nv))
    cdef double[:, ::1] tmp2 = np.zeros((nx, nv))
    cdef double[::1] qv = np.zeros(nx)
    cdef double[::1] rhs = np.zeros(nx)
    cdef double[::1] gsum = np.zeros(nx)
    cdef double[::1] dsum = np.zeros(nx)
    cdef double[::1] vp = np.zeros(nv)
    cdef double[::1] vn = np.zeros(nv)
    cdef double[::1] vm = np.zeros(nv)
    cdef double[::1] vw = np.zeros(nv)

    for k in range(nv):
        vp[k] = 0.5 * (vel[k] + abs(vel[k]))
        vn[k] = 0.5 * (vel[k] - abs(vel[k]))
        vm[k] = vel[k] * M[k]
        vw[k] = vel[k] * w[k]

    with nogil:
        for step in range(n_steps):
            for j in range(s):
                a = ai[j, j]
                # bracket content Y of the stage resolvent
                for i in range(nx):
                    gsum[i] = 0.0
                    dsum[i] = 0.0
                    for k in range(nv):
                        y[i, k] = eps * g[i, k]
                for q in range(j):
                    cexp = dt * ae[j, q]
                    cimp = (dt * eps_inv) * ai[j, q]
                    for i in range(nx):
                        gsum[i] += ai[j, q] * grad[q, i]
                        dsum[i] += ae[j, q] * av[q, i]
                        for k in range(nv):
                            y[i, k] = y[i, k] - cexp * tr[q, i, k] + cimp * lg[q, i, k]
                for i in range(nx):
                    dv = dt * (drift * dsum[i] - gsum[i])
                    for k in range(nv):
                        y[i, k] += dv * vm[k]
                # density stage
                for i in range(nx):
                    acc = 0.0
                    for k in range(nv):
                        acc += y[i, k] * FW[j, k]
                    acc = a * dt * acc
                    for q in range(j):
                        acc += ai[j, q] * (dt * eps_inv) * fl[q, i]
                    qv[i] = acc
                _stencil(cr_o, cr_c, qv, rhs)
                for i in range(nx):
                    rhs[i] = rho[i] - rhs[i]
                _lu_solve(LU[j], PIV[j], rhs)
                for i in range(nx):
                    rho_st[j, i] = rhs[i]
                _stencil(cg_o, cg_c, rho_st[j], grad[j])
                _stencil(av_o, av_c, rho_st[j], av[j])
                # micro stage
                for i in range(nx):
                    gr = eps * dt * a * grad[j, i]
                    for k in range(nv):
                        acc = 0.0
                        for p in range(nv):
                            acc += R[j, k, p] * y[i, p]
                        g_st[j, i, k] = eps * acc - gr * RVM[j, k]
                if j == s - 1:
                    break
                # quantities reused by later stages
                _stencil2(um_o, um_c, g_st[j], tmp)
                _stencil2(up_o, up_c, g_st[j], tmp2)
                for i in range(nx):
                    mean = 0.0
                    for k in range(nv):
                        tr[j, i, k] = vp[k] * tmp[i, k] + vn[k] * tmp2[i, k]
                        mean += tr[j, i, k] * w[k]
                    acc = 0.0
                    for k in range(nv):
                        tr[j, i, k] -= mean * M[k]
                        acc += g_st[j, i, k] * vw[k]
                    fl[j, i] = acc
                    for k in range(nv):
                        acc = 0.0
                        for p in range(nv):
                            acc += Lm[k, p] * g_st[j, i, p]
                        lg[j, i, k] = acc
            for i in range(nx):
                rho[i] = rho_st[s - 1, i]
                for k in range(nv):
                    g[i, k] = g_st[s - 1, i, k]
    return rho_a, g_a
