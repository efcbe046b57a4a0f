# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Same contract as tensormdp._kernels._reference. The accumulators run Kahan
compensation per element; the rollouts replicate the reference arithmetic
exactly (the extension is built with -ffp-contract=off for that reason).
"""

from libc.math cimport floor, sin, sqrt

import numpy as np


def weighted_outer3_sum(w, s_feats, a_feats, sp_feats):
    """Compensated sum of w[t] * outer(s_feats[t], a_feats[t], sp_feats[t])."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, ::1] S = np.ascontiguousarray(s_feats, dtype=np.float64)
    cdef double[:, ::1] A = np.ascontiguousarray(a_feats, dtype=np.float64)
    cdef double[:, ::1] Sp = np.ascontiguousarray(sp_feats, dtype=np.float64)
    cdef Py_ssize_t n = S.shape[0], d1 = S.shape[1], d2 = A.shape[1], d3 = Sp.shape[1]
    out = np.zeros((d1, d2, d3))
    comp = np.zeros((d1, d2, d3))
    cdef double[:, :, ::1] o = out
    cdef double[:, :, ::1] c = comp
    cdef Py_ssize_t t, i, j, k
    cdef double wi, coef, y, s
    with nogil:
        for t in range(n):
            wi = wv[t]
            for i in range(d1):
                for j in range(d2):
                    coef = wi * S[t, i] * A[t, j]
                    for k in range(d3):
                        y = coef * Sp[t, k] - c[i, j, k]
                        s = o[i, j, k] + y
                        c[i, j, k] = (s - o[i, j, k]) - y
                        o[i, j, k] = s
    return out


def gram_sum(x):
    """Compensated sum of outer(x[t], x[t])."""
    cdef double[:, ::1] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    out = np.zeros((d, d))
    comp = np.zeros((d, d))
    cdef double[:, ::1] o = out
    cdef double[:, ::1] c = comp
    cdef Py_ssize_t t, i, j
    cdef double xi, y, s
    with nogil:
        for t in range(n):
            for i in range(d):
                xi = X[t, i]
                for j in range(d):
                    y = xi * X[t, j] - c[i, j]
                    s = o[i, j] + y
                    c[i, j] = (s - o[i, j]) - y
                    o[i, j] = s
    return out


def sde_rollout(
    x0,
    actions,
    noise,
    double tau,
    int substeps,
    drift_table,
    double grid_lo,
    double cell_width,
    double well_freq,
    double confinement,
    double clamp,
):
    """Euler-Maruyama rollout; see the reference implementation for the contract."""
    cdef double[:, ::1] act = np.ascontiguousarray(actions, dtype=np.float64)
    cdef double[:, ::1] z = np.ascontiguousarray(noise, dtype=np.float64)
    cdef double[:, :, ::1] drift = np.ascontiguousarray(drift_table, dtype=np.float64)
    cdef Py_ssize_t n = act.shape[0]
    cdef int n_cells = <int> drift.shape[0]
    cdef double h = tau / substeps
    cdef double root = sqrt(2.0 * h)
    states = np.empty((n + 1, 2))
    cdef double[:, ::1] st = states
    cdef double x = x0[0], y = x0[1]
    cdef double fx, fy, gx, gy
    cdef Py_ssize_t t, m, idx = 0
    cdef int ci, cj
    cdef long n_clamped = 0
    cdef bint hit
    st[0, 0] = x
    st[0, 1] = y
    with nogil:
        for t in range(n):
            ci = <int> floor((act[t, 0] - grid_lo) / cell_width)
            cj = <int> floor((act[t, 1] - grid_lo) / cell_width)
            if ci < 0:
                ci = 0
            elif ci > n_cells - 1:
                ci = n_cells - 1
            if cj < 0:
                cj = 0
            elif cj > n_cells - 1:
                cj = n_cells - 1
            fx = drift[ci, cj, 0]
            fy = drift[ci, cj, 1]
            for m in range(substeps):
                gx = -well_freq * sin(well_freq * x) + 2.0 * confinement * x + fx
                gy = -well_freq * sin(well_freq * y) + 2.0 * confinement * y + fy
                x = x - gx * h + root * z[idx, 0]
                y = y - gy * h + root * z[idx, 1]
                idx += 1
                hit = False
                if x < -clamp:
                    x = -clamp
                    hit = True
                elif x > clamp:
                    x = clamp
                    hit = True
                if y < -clamp:
                    y = -clamp
                    hit = True
                elif y > clamp:
                    y = clamp
                    hit = True
                if hit:
                    n_clamped += 1
            st[t + 1, 0] = x
            st[t + 1, 1] = y
    return states, n_clamped


def tabular_rollout(s0, action_cdf, next_cdf, uniforms):
    """Tabular MDP rollout from pre-drawn uniforms; see the reference contract."""
    cdef double[:, ::1] acdf = np.ascontiguousarray(action_cdf, dtype=np.float64)
    cdef double[:, :, ::1] ncdf = np.ascontiguousarray(next_cdf, dtype=np.float64)
    cdef double[:, ::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t n_actions = acdf.shape[1]
    cdef Py_ssize_t n_states = ncdf.shape[2]
    states = np.empty(n + 1, dtype=np.int64)
    actions = np.empty(n, dtype=np.int64)
    cdef long[::1] sv = states
    cdef long[::1] av = actions
    cdef Py_ssize_t t, s, a, sp, lo, hi, mid
    cdef double uu
    s = <Py_ssize_t> s0
    sv[0] = s
    with nogil:
        for t in range(n):
            # first index with cdf value > u ("right" bisection)
            uu = u[t, 0]
            lo = 0
            hi = n_actions
            while lo < hi:
                mid = (lo + hi) // 2
                if acdf[s, mid] <= uu:
                    lo = mid + 1
                else:
                    hi = mid
            a = lo if lo < n_actions else n_actions - 1
            uu = u[t, 1]
            lo = 0
            hi = n_states
            while lo < hi:
                mid = (lo + hi) // 2
                if ncdf[s, a, mid] <= uu:
                    lo = mid + 1
                else:
                    hi = mid
            sp = lo if lo < n_states else n_states - 1
            av[t] = a
            sv[t + 1] = sp
            s = sp
    return states, actions
