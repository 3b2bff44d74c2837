# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-point kernels; see ``_kernels_py`` for the numpy twin."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, fabs, isfinite

cnp.import_array()

cdef double SQ2 = sqrt(2.0)


cdef inline double inv_small(double[:, ::1] A, double[:, ::1] out, int n) noexcept nogil:
    """Invert an n x n matrix (n <= 3) in place into ``out``; return det."""
    cdef double det, c00, c01, c02, c10, c11, c12, c20, c21, c22
    if n == 1:
        det = A[0, 0]
        out[0, 0] = 1.0 / det
        return det
    if n == 2:
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        out[0, 0] = A[1, 1] / det
        out[0, 1] = -A[0, 1] / det
        out[1, 0] = -A[1, 0] / det
        out[1, 1] = A[0, 0] / det
        return det
    c00 = A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1]
    c01 = A[1, 2] * A[2, 0] - A[1, 0] * A[2, 2]
    c02 = A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]
    c10 = A[0, 2] * A[2, 1] - A[0, 1] * A[2, 2]
    c11 = A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0]
    c12 = A[0, 1] * A[2, 0] - A[0, 0] * A[2, 1]
    c20 = A[0, 1] * A[1, 2] - A[0, 2] * A[1, 1]
    c21 = A[0, 2] * A[1, 0] - A[0, 0] * A[1, 2]
    c22 = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    det = A[0, 0] * c00 + A[0, 1] * c01 + A[0, 2] * c02
    out[0, 0] = c00 / det
    out[0, 1] = c10 / det
    out[0, 2] = c20 / det
    out[1, 0] = c01 / det
    out[1, 1] = c11 / det
    out[1, 2] = c21 / det
    out[2, 0] = c02 / det
    out[2, 1] = c12 / det
    out[2, 2] = c22 / det
    return det


cdef inline void mixture(double d, double beta, double[:, ::1] a1, double[:, ::1] a2,
                         double[:, ::1] A, int n) noexcept nogil:
    cdef int i, j
    for i in range(n):
        for j in range(n):
            A[i, j] = (1.0 - d) * a1[i, j] + d * a2[i, j]
    if n == 3:
        A[0, 1] += beta
        A[1, 0] += beta
        A[2, 2] -= beta


cdef inline double phi_at(double d, double beta, double[::1] jump, double[:, ::1] a1,
                          double[:, ::1] a2, double[:, ::1] A, double[:, ::1] Ai) noexcept nogil:
    cdef double x0, x1, x2
    mixture(d, beta, a1, a2, A, 3)
    inv_small(A, Ai, 3)
    x0 = Ai[0, 0] * jump[0] + Ai[0, 1] * jump[1] + Ai[0, 2] * jump[2]
    x1 = Ai[1, 0] * jump[0] + Ai[1, 1] * jump[1] + Ai[1, 2] * jump[2]
    x2 = Ai[2, 0] * jump[0] + Ai[2, 1] * jump[1] + Ai[2, 2] * jump[2]
    return -(x0 * x1 - 0.5 * x2 * x2)


cdef inline double fro(double[:, ::1] A, int n) noexcept nogil:
    cdef double s = 0.0
    cdef int i, j
    for i in range(n):
        for j in range(n):
            s += A[i, j] * A[i, j]
    return sqrt(s)


def relaxed_batch(d_in, eps_in, a1_in, a2_in, t1_in, t2_in, double w1, double w2,
                  double gamma, double cond_max=1e12):
    """Same contract as ``_kernels_py.relaxed_batch``."""
    cdef double[::1] d = np.array(d_in, dtype=np.float64, order="C")
    cdef double[:, ::1] eps = np.array(eps_in, dtype=np.float64, order="C")
    cdef double[:, ::1] a1 = np.array(a1_in, dtype=np.float64, order="C")
    cdef double[:, ::1] a2 = np.array(a2_in, dtype=np.float64, order="C")
    cdef double[::1] t1 = np.array(t1_in, dtype=np.float64, order="C")
    cdef double[::1] t2 = np.array(t2_in, dtype=np.float64, order="C")
    cdef Py_ssize_t N = eps.shape[0]
    cdef int n = eps.shape[1]
    value_a = np.empty(N)
    dd_a = np.empty(N)
    deps_a = np.empty((N, n))
    hess_a = np.empty((N, n, n))
    mixed_a = np.empty((N, n))
    regime_a = np.empty(N, dtype=np.int8)
    beta_a = np.empty(N)
    status_a = np.zeros(N, dtype=np.int8)
    cdef double[::1] value = value_a
    cdef double[::1] dd = dd_a
    cdef double[:, ::1] deps = deps_a
    cdef double[:, :, ::1] hess = hess_a
    cdef double[:, ::1] mixed = mixed_a
    cdef signed char[::1] regime = regime_a
    cdef double[::1] beta_o = beta_a
    cdef signed char[::1] status = status_a

    cdef double[:, ::1] A = np.zeros((3, 3))
    cdef double[:, ::1] Ai = np.zeros((3, 3))
    cdef double[:, ::1] da = np.zeros((3, 3))
    cdef double[:, ::1] M = np.zeros((3, 3))
    cdef double[::1] s0 = np.zeros(3)
    cdef double[::1] jump = np.zeros(3)
    cdef double[::1] delta = np.zeros(3)
    cdef double[::1] x1 = np.zeros(3)
    cdef double[::1] x2 = np.zeros(3)
    cdef double[::1] s1 = np.zeros(3)
    cdef double[::1] s2 = np.zeros(3)
    cdef double[::1] dl = np.zeros(3)
    cdef double[::1] wv = np.zeros(3)
    cdef double[::1] g = np.zeros(3)
    cdef double[::1] tmp = np.zeros(3)

    cdef double na = fro(a1, n) + fro(a2, n)
    cdef double nt = 0.0, nt2 = 0.0
    cdef Py_ssize_t k
    cdef int i, j, l, m, it, reg
    cdef double dk, d1, d2, b, ne, nj, f0, fg, lo, hi, mid, gc, tol
    cdef double W1, W2, det, sd, phib, scale, bd, cond, r

    for i in range(n):
        nt += t1[i] * t1[i]
        nt2 += t2[i] * t2[i]
        s0[i] = 0.0
        for j in range(n):
            s0[i] += a2[i, j] * t2[j] - a1[i, j] * t1[j]
            da[i, j] = a1[i, j] - a2[i, j]
    nt = sqrt(nt) + sqrt(nt2)
    gc = gamma * (1.0 - 1e-8)
    tol = 1e-12 * gamma
    if tol < 1e-14:
        tol = 1e-14

    with nogil:
        for k in range(N):
            dk = d[k]
            d1 = dk
            d2 = 1.0 - dk
            ne = 0.0
            nj = 0.0
            for i in range(n):
                ne += eps[k, i] * eps[k, i]
                jump[i] = s0[i]
                for j in range(n):
                    jump[i] += da[i, j] * eps[k, j]
                nj += jump[i] * jump[i]
            ne = sqrt(ne) + nt + 1.0
            reg = 1
            b = 0.0
            if sqrt(nj) <= 1e-12 * na * ne and n >= 2:
                reg = 0
            elif n == 3:
                f0 = phi_at(dk, 0.0, jump, a1, a2, A, Ai)
                if f0 <= 0.0:
                    fg = phi_at(dk, gc, jump, a1, a2, A, Ai)
                    if fg < 0.0:
                        reg = 3
                        b = gamma
                    else:
                        reg = 2
                        if f0 < 0.0:
                            lo = 0.0
                            hi = gc
                            it = 0
                            while it < 200 and hi - lo > tol:
                                mid = 0.5 * (lo + hi)
                                if phi_at(dk, mid, jump, a1, a2, A, Ai) < 0.0:
                                    lo = mid
                                else:
                                    hi = mid
                                it += 1
                            b = 0.5 * (lo + hi)
            regime[k] = reg
            beta_o[k] = b

            mixture(dk, b, a1, a2, A, n)
            inv_small(A, Ai, n)
            if n == 3:
                cond = fro(A, 3) * fro(Ai, 3)
                if not isfinite(cond) or cond > cond_max:
                    status[k] = 1
                    for i in range(3):
                        for j in range(3):
                            Ai[i, j] = 0.0
            for i in range(n):
                delta[i] = 0.0
                for j in range(n):
                    delta[i] += Ai[i, j] * jump[j]
            for i in range(n):
                x1[i] = eps[k, i] - d2 * delta[i] - t1[i]
                x2[i] = eps[k, i] + d1 * delta[i] - t2[i]
            W1 = w1
            W2 = w2
            for i in range(n):
                s1[i] = 0.0
                s2[i] = 0.0
                for j in range(n):
                    s1[i] += a1[i, j] * x1[j]
                    s2[i] += a2[i, j] * x2[j]
                W1 += 0.5 * x1[i] * s1[i]
                W2 += 0.5 * x2[i] * s2[i]
            det = 0.0
            if n == 3:
                det = delta[0] * delta[1] - 0.5 * delta[2] * delta[2]
            value[k] = d1 * W1 + d2 * W2 + b * d1 * d2 * det
            sd = 0.0
            for i in range(n):
                deps[k, i] = d1 * s1[i] + d2 * s2[i]
                sd += deps[k, i] * delta[i]
            dd[k] = sd + W1 - W2 - (d1 - d2) * b * det

            # M = Ainv (a1 - a2); hess = d1 a1 + d2 a2 - d1 d2 da Ainv da
            for i in range(n):
                for j in range(n):
                    M[i, j] = 0.0
                    for l in range(n):
                        M[i, j] += Ai[i, l] * da[l, j]
            for i in range(n):
                for j in range(n):
                    r = 0.0
                    for l in range(n):
                        r += da[i, l] * M[l, j]
                    hess[k, i, j] = d1 * a1[i, j] + d2 * a2[i, j] - d1 * d2 * r
            # ddelta/dd = -Ainv (a2 - a1) delta = Ainv da delta = M delta
            for i in range(n):
                dl[i] = 0.0
                for j in range(n):
                    dl[i] += M[i, j] * delta[j]
            if n == 3 and reg == 2 and d1 > 0.0 and d2 > 0.0 and status[k] == 0:
                tmp[0] = -delta[1]
                tmp[1] = -delta[0]
                tmp[2] = delta[2]
                phib = 0.0
                for i in range(3):
                    wv[i] = 0.0
                    for j in range(3):
                        wv[i] += Ai[i, j] * tmp[j]
                    phib += tmp[i] * wv[i]
                scale = (delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2]) * fro(Ai, 3)
                if phib <= 1e-14 * scale:
                    status[k] = 2
                else:
                    for i in range(3):
                        g[i] = 0.0
                        for j in range(3):
                            g[i] += da[i, j] * wv[j]
                    for i in range(3):
                        for j in range(3):
                            hess[k, i, j] += d1 * d2 * g[i] * g[j] / phib
                    # d beta / d d = w . (a2 - a1) delta / phib = -w . da delta / phib
                    bd = 0.0
                    for i in range(3):
                        r = 0.0
                        for j in range(3):
                            r += da[i, j] * delta[j]
                        bd -= wv[i] * r
                    bd /= phib
                    for i in range(3):
                        dl[i] += wv[i] * bd
            for i in range(n):
                r = s1[i] - s2[i]
                for j in range(n):
                    r += (d1 * a1[i, j] + d2 * a2[i, j]) * delta[j] - d1 * d2 * da[i, j] * dl[j]
                mixed[k, i] = r
    return value_a, dd_a, deps_a, hess_a, mixed_a, regime_a, beta_a, status_a


cdef inline void normal_map(double th, double[:, ::1] Nm) noexcept nogil:
    cdef double n1 = cos(th), n2 = sin(th)
    Nm[0, 0] = n1
    Nm[0, 1] = 0.0
    Nm[1, 0] = 0.0
    Nm[1, 1] = n2
    Nm[2, 0] = n2 / SQ2
    Nm[2, 1] = n1 / SQ2


def rank1_energies(theta_in, double d, eps_in, a1_in, a2_in, t1_in, t2_in, double w1, double w2):
    """Same contract as ``_kernels_py.rank1_energies``."""
    cdef double[::1] theta = np.ascontiguousarray(np.atleast_1d(theta_in), dtype=np.float64)
    eps = np.asarray(eps_in, dtype=np.float64)
    a1 = np.asarray(a1_in, dtype=np.float64)
    a2 = np.asarray(a2_in, dtype=np.float64)
    t1 = np.asarray(t1_in, dtype=np.float64)
    t2 = np.asarray(t2_in, dtype=np.float64)
    r1 = eps - t1
    r2 = eps - t2
    cdef double E0 = d * (0.5 * r1 @ a1 @ r1 + w1) + (1.0 - d) * (0.5 * r2 @ a2 @ r2 + w2)
    cdef double[::1] jump = np.ascontiguousarray(a2 @ (t2 - eps) - a1 @ (t1 - eps))
    cdef double[:, ::1] A0 = np.ascontiguousarray((1.0 - d) * a1 + d * a2)
    cdef Py_ssize_t K = theta.shape[0], k
    out_a = np.empty(K)
    cdef double[::1] out = out_a
    cdef double[:, ::1] Nm = np.zeros((3, 2))
    cdef double[:, ::1] AN = np.zeros((3, 2))
    cdef double v0, v1, k00, k01, k11, det, q
    cdef int i, j
    with nogil:
        for k in range(K):
            normal_map(theta[k], Nm)
            for i in range(3):
                for j in range(2):
                    AN[i, j] = A0[i, 0] * Nm[0, j] + A0[i, 1] * Nm[1, j] + A0[i, 2] * Nm[2, j]
            k00 = Nm[0, 0] * AN[0, 0] + Nm[1, 0] * AN[1, 0] + Nm[2, 0] * AN[2, 0]
            k01 = Nm[0, 0] * AN[0, 1] + Nm[1, 0] * AN[1, 1] + Nm[2, 0] * AN[2, 1]
            k11 = Nm[0, 1] * AN[0, 1] + Nm[1, 1] * AN[1, 1] + Nm[2, 1] * AN[2, 1]
            v0 = Nm[0, 0] * jump[0] + Nm[1, 0] * jump[1] + Nm[2, 0] * jump[2]
            v1 = Nm[0, 1] * jump[0] + Nm[1, 1] * jump[1] + Nm[2, 1] * jump[2]
            det = k00 * k11 - k01 * k01
            q = (k11 * v0 * v0 - 2.0 * k01 * v0 * v1 + k00 * v1 * v1) / det
            out[k] = E0 - 0.5 * d * (1.0 - d) * q
    return out_a


cdef inline void solve_spd6(double[:, ::1] H, double[::1] g, double[::1] x) noexcept nogil:
    """Gaussian elimination with partial pivoting on a 6x6 system (destroys H, g)."""
    cdef int i, j, k, p
    cdef double m, t
    for k in range(6):
        p = k
        for i in range(k + 1, 6):
            if fabs(H[i, k]) > fabs(H[p, k]):
                p = i
        if p != k:
            for j in range(6):
                t = H[k, j]
                H[k, j] = H[p, j]
                H[p, j] = t
            t = g[k]
            g[k] = g[p]
            g[p] = t
        for i in range(k + 1, 6):
            m = H[i, k] / H[k, k]
            for j in range(k, 6):
                H[i, j] -= m * H[k, j]
            g[i] -= m * g[k]
    for i in range(5, -1, -1):
        t = g[i]
        for j in range(i + 1, 6):
            t -= H[i, j] * x[j]
        x[i] = t / H[i, i]


def rank2_energies(geo_in, double d, eps_in, a1_in, a2_in, t1_in, t2_in, double w1, double w2,
                   double reg=1e-13):
    """Same contract as ``_kernels_py.rank2_energies``."""
    cdef double[:, ::1] geo = np.ascontiguousarray(np.atleast_2d(geo_in), dtype=np.float64)
    cdef double[::1] eps = np.array(eps_in, dtype=np.float64, order="C")
    cdef double[:, :, ::1] al = np.ascontiguousarray(np.stack([a1_in, a2_in]), dtype=np.float64)
    cdef double[:, ::1] tt = np.ascontiguousarray(np.stack([t1_in, t2_in]), dtype=np.float64)
    cdef double[::1] ww = np.array([w1, w2], dtype=np.float64)
    cdef Py_ssize_t K = geo.shape[0], k
    out_a = np.empty(K)
    cdef double[::1] out = out_a
    cdef double[:, ::1] H = np.zeros((6, 6))
    cdef double[::1] gv = np.zeros(6)
    cdef double[::1] g2 = np.zeros(6)
    cdef double[::1] x = np.zeros(6)
    cdef double[:, ::1] G = np.zeros((3, 6))
    cdef double[:, ::1] AG = np.zeros((3, 6))
    cdef double[:, ::1] No = np.zeros((3, 2))
    cdef double[:, ::1] NA = np.zeros((3, 2))
    cdef double[:, ::1] NB = np.zeros((3, 2))
    cdef double[::1] r = np.zeros(3)
    cdef double[::1] sr = np.zeros(3)
    cdef double lam, s, lo, hi, muA, muB, wk, E0, tr, cA, cB, cin, en, res
    cdef int leaf, ph, i, j, l, branch
    with nogil:
        for k in range(K):
            lam = geo[k, 3]
            if lam < 1e-9:
                lam = 1e-9
            if lam > 1.0 - 1e-9:
                lam = 1.0 - 1e-9
            s = geo[k, 4]
            if s < 0.0:
                s = 0.0
            if s > 1.0:
                s = 1.0
            lo = (d - (1.0 - lam)) / lam
            if lo < 0.0:
                lo = 0.0
            hi = d / lam
            if hi > 1.0:
                hi = 1.0
            muA = lo + s * (hi - lo)
            muB = (d - lam * muA) / (1.0 - lam)
            if muB < 0.0:
                muB = 0.0
            if muB > 1.0:
                muB = 1.0
            normal_map(geo[k, 0], No)
            normal_map(geo[k, 1], NA)
            normal_map(geo[k, 2], NB)
            for i in range(6):
                gv[i] = 0.0
                for j in range(6):
                    H[i, j] = 0.0
            E0 = 0.0
            for leaf in range(4):
                branch = leaf // 2
                ph = leaf % 2
                if branch == 0:
                    cA = -(1.0 - lam)
                    if ph == 0:
                        wk = lam * muA
                        cin = -(1.0 - muA)
                    else:
                        wk = lam * (1.0 - muA)
                        cin = muA
                else:
                    cA = lam
                    if ph == 0:
                        wk = (1.0 - lam) * muB
                        cin = -(1.0 - muB)
                    else:
                        wk = (1.0 - lam) * (1.0 - muB)
                        cin = muB
                for i in range(3):
                    for j in range(6):
                        G[i, j] = 0.0
                    G[i, 0] = cA * No[i, 0]
                    G[i, 1] = cA * No[i, 1]
                    if branch == 0:
                        G[i, 2] = cin * NA[i, 0]
                        G[i, 3] = cin * NA[i, 1]
                    else:
                        G[i, 4] = cin * NB[i, 0]
                        G[i, 5] = cin * NB[i, 1]
                en = 0.0
                for i in range(3):
                    r[i] = eps[i] - tt[ph, i]
                for i in range(3):
                    sr[i] = 0.0
                    for j in range(3):
                        sr[i] += al[ph, i, j] * r[j]
                    en += 0.5 * r[i] * sr[i]
                E0 += wk * (en + ww[ph])
                for i in range(3):
                    for j in range(6):
                        AG[i, j] = 0.0
                        for l in range(3):
                            AG[i, j] += al[ph, i, l] * G[l, j]
                for i in range(6):
                    for l in range(3):
                        gv[i] += wk * G[l, i] * sr[l]
                    for j in range(6):
                        for l in range(3):
                            H[i, j] += wk * G[l, i] * AG[l, j]
            tr = 0.0
            for i in range(6):
                tr += H[i, i]
            for i in range(6):
                H[i, i] += reg * tr
                g2[i] = gv[i]
            solve_spd6(H, g2, x)
            res = 0.0
            for i in range(6):
                res += gv[i] * x[i]
            out[k] = E0 - 0.5 * res
    return out_a
