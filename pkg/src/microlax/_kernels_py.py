"""Vectorised numpy kernels; reference twin of the compiled ``_kernels``.

Every function here has the same signature and output layout as its
compiled counterpart.  Status codes: 0 ok, 1 singular translated modulus,
2 degenerate translation sensitivity.
"""

from __future__ import annotations

import numpy as np

T3 = np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
SQ2 = np.sqrt(2.0)


def inv_small(A: np.ndarray):
    """Inverse and determinant of a stack of 1x1, 2x2 or 3x3 matrices."""
    n = A.shape[-1]
    if n == 1:
        det = A[..., 0, 0]
        return (1.0 / det)[..., None, None], det
    if n == 2:
        a, b, c, dd = A[..., 0, 0], A[..., 0, 1], A[..., 1, 0], A[..., 1, 1]
        det = a * dd - b * c
        adj = np.stack([np.stack([dd, -b], -1), np.stack([-c, a], -1)], -2)
        return adj / det[..., None, None], det
    a = A
    c00 = a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1]
    c01 = a[..., 1, 2] * a[..., 2, 0] - a[..., 1, 0] * a[..., 2, 2]
    c02 = a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]
    c10 = a[..., 0, 2] * a[..., 2, 1] - a[..., 0, 1] * a[..., 2, 2]
    c11 = a[..., 0, 0] * a[..., 2, 2] - a[..., 0, 2] * a[..., 2, 0]
    c12 = a[..., 0, 1] * a[..., 2, 0] - a[..., 0, 0] * a[..., 2, 1]
    c20 = a[..., 0, 1] * a[..., 1, 2] - a[..., 0, 2] * a[..., 1, 1]
    c21 = a[..., 0, 2] * a[..., 1, 0] - a[..., 0, 0] * a[..., 1, 2]
    c22 = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    det = a[..., 0, 0] * c00 + a[..., 0, 1] * c01 + a[..., 0, 2] * c02
    adj = np.stack(
        [np.stack([c00, c10, c20], -1), np.stack([c01, c11, c21], -1), np.stack([c02, c12, c22], -1)], -2
    )
    return adj / det[..., None, None], det


def _mv(A, x):
    return np.einsum("...ij,...j->...i", A, x)


def _mixture(d, beta, a1, a2, n):
    A = (1.0 - d)[:, None, None] * a1 + d[:, None, None] * a2
    if n == 3:
        A = A - beta[:, None, None] * T3
    return A


def _phi(d, beta, jump, a1, a2):
    Ainv, _ = inv_small(_mixture(d, beta, a1, a2, 3))
    x = _mv(Ainv, jump)
    return -(x[:, 0] * x[:, 1] - 0.5 * x[:, 2] ** 2)


def relaxed_batch(d, eps, a1, a2, t1, t2, w1, w2, gamma, cond_max=1e12):
    """Relaxed energy, first and second derivatives on a batch of points.

    Parameters
    ----------
    d : (N,) array in [0, 1]
    eps : (N, n) array, n in {1, 2, 3}
    a1, a2 : (n, n) moduli; t1, t2 : (n,) eigenstrains; w1, w2 : offsets
    gamma : float
        Largest admissible translation (ignored unless n == 3).

    Returns
    -------
    value, d_d, d_eps, hess, mixed, regime, beta, status
    """
    d = np.ascontiguousarray(d, dtype=float)
    eps = np.ascontiguousarray(eps, dtype=float)
    N, n = eps.shape
    a1 = np.asarray(a1, float)
    a2 = np.asarray(a2, float)
    t1 = np.asarray(t1, float)
    t2 = np.asarray(t2, float)
    jump = (a2 @ t2 - a1 @ t1)[None, :] + eps @ (a1 - a2).T
    regime = np.ones(N, dtype=np.int8)
    beta = np.zeros(N)
    status = np.zeros(N, dtype=np.int8)
    na = np.linalg.norm(a1) + np.linalg.norm(a2)
    ne = np.linalg.norm(eps, axis=1) + np.linalg.norm(t1) + np.linalg.norm(t2) + 1.0
    homog = np.linalg.norm(jump, axis=1) <= 1e-12 * na * ne
    if n == 3:
        regime[homog] = 0
        todo = ~homog
        gc = gamma * (1.0 - 1e-8)
        f0 = np.where(todo, _phi(d, np.zeros(N), jump, a1, a2), 1.0)
        fg = np.where(todo & (f0 <= 0), _phi(d, np.full(N, gc), jump, a1, a2), 1.0)
        three = todo & (f0 <= 0) & (fg < 0)
        two = todo & (f0 <= 0) & (fg >= 0)
        regime[three] = 3
        beta[three] = gamma
        regime[two] = 2
        idx = np.nonzero(two & (f0 < 0))[0]
        if idx.size:
            beta[idx] = _bisect(d[idx], jump[idx], a1, a2, gc, max(1e-14, 1e-12 * gamma))
    elif n == 2:
        regime[homog] = 0

    d1 = d
    d2 = 1.0 - d
    A = _mixture(d, beta, a1, a2, n)
    Ainv, _ = inv_small(A)
    if n == 3:
        cond = np.linalg.norm(A, axis=(1, 2)) * np.linalg.norm(Ainv, axis=(1, 2))
        bad = ~np.isfinite(cond) | (cond > cond_max)
        status[bad] = 1
        Ainv[bad] = 0.0
    delta = _mv(Ainv, jump)
    x1 = eps - d2[:, None] * delta
    x2 = eps + d1[:, None] * delta
    r1 = x1 - t1
    r2 = x2 - t2
    s1 = r1 @ a1.T
    s2 = r2 @ a2.T
    W1 = 0.5 * np.einsum("ij,ij->i", r1, s1) + w1
    W2 = 0.5 * np.einsum("ij,ij->i", r2, s2) + w2
    if n == 3:
        det = delta[:, 0] * delta[:, 1] - 0.5 * delta[:, 2] ** 2
    else:
        det = np.zeros(N)
    value = d1 * W1 + d2 * W2 + beta * d1 * d2 * det
    sbar = d1[:, None] * s1 + d2[:, None] * s2
    d_d = np.einsum("ij,ij->i", sbar, delta) + W1 - W2 - (d1 - d2) * beta * det
    da = a1 - a2
    hess = (
        d1[:, None, None] * a1
        + d2[:, None, None] * a2
        - (d1 * d2)[:, None, None] * np.einsum("ij,njk,kl->nil", da, Ainv, da)
    )
    ddelta = -_mv(Ainv, delta @ (a2 - a1).T)
    if n == 3:
        Td = delta @ T3
        w = _mv(Ainv, Td)
        phib = np.einsum("ij,ij->i", Td, w)
        sel = (regime == 2) & (d1 > 0) & (d2 > 0) & (status == 0)
        if np.any(sel):
            scale = np.einsum("ij,ij->i", delta, delta) * np.linalg.norm(Ainv, axis=(1, 2))
            degen = sel & (phib <= 1e-14 * scale)
            status[degen] = 2
            sel &= ~degen
            k = np.nonzero(sel)[0]
            g = w[k] @ da.T
            hess[k] += (d1[k] * d2[k] / phib[k])[:, None, None] * g[:, :, None] * g[:, None, :]
            bd = np.einsum("ij,ij->i", w[k], delta[k] @ (a2 - a1).T) / phib[k]
            ddelta[k] += w[k] * bd[:, None]
    mixed = s1 - s2 + d1[:, None] * (delta @ a1.T) + d2[:, None] * (delta @ a2.T)
    mixed += (d1 * d2)[:, None] * (ddelta @ (a2 - a1).T)
    return value, d_d, sbar, hess, mixed, regime, beta, status


def _bisect(d, jump, a1, a2, gc, tol):
    lo = np.zeros(d.size)
    hi = np.full(d.size, gc)
    it = 0
    while it < 200 and np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        neg = _phi(d, mid, jump, a1, a2) < 0
        active = hi - lo > tol
        lo = np.where(active & neg, mid, lo)
        hi = np.where(active & ~neg, mid, hi)
        it += 1
    return 0.5 * (lo + hi)


def normal_map(theta):
    """Stack of 3x2 maps ``a -> sym(a (x) n)`` in Mandel form."""
    n1 = np.cos(theta)
    n2 = np.sin(theta)
    z = np.zeros_like(n1)
    return np.stack(
        [np.stack([n1, z], -1), np.stack([z, n2], -1), np.stack([n2 / SQ2, n1 / SQ2], -1)], -2
    )


def rank1_energies(theta, d, eps, a1, a2, t1, t2, w1, w2):
    """Optimal rank-1 laminate energy for each normal angle.

    The leaf strains ``eps - d2 sym(a n)`` and ``eps + d1 sym(a n)`` are
    eliminated in closed form from traction continuity.
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    eps = np.asarray(eps, float)
    r1 = eps - t1
    r2 = eps - t2
    E0 = d * (0.5 * r1 @ a1 @ r1 + w1) + (1.0 - d) * (0.5 * r2 @ a2 @ r2 + w2)
    jump = a2 @ (t2 - eps) - a1 @ (t1 - eps)
    A0 = (1.0 - d) * a1 + d * a2
    Nm = normal_map(theta)
    v = np.einsum("kij,i->kj", Nm, jump)
    K = np.einsum("kia,ij,kjb->kab", Nm, A0, Nm)
    Kinv, _ = inv_small(K)
    q = np.einsum("ka,kab,kb->k", v, Kinv, v)
    return E0 - 0.5 * d * (1.0 - d) * q


def rank2_leaves(geo, d):
    """Leaf weights, phases and strain maps of rank-2 laminates.

    ``geo`` rows are ``(theta_outer, theta_A, theta_B, lam, s)`` where
    ``lam`` is the outer fraction of branch A and ``s`` in [0, 1] places the
    phase-1 fraction of branch A inside its feasible interval.
    """
    geo = np.atleast_2d(np.asarray(geo, float))
    to, ta, tb, lam, s = geo.T
    lam = np.clip(lam, 1e-9, 1 - 1e-9)
    lo = np.maximum(0.0, (d - (1.0 - lam)) / lam)
    hi = np.minimum(1.0, d / lam)
    muA = lo + np.clip(s, 0.0, 1.0) * (hi - lo)
    muB = np.clip((d - lam * muA) / (1.0 - lam), 0.0, 1.0)
    return to, ta, tb, lam, muA, muB


def rank2_energies(geo, d, eps, a1, a2, t1, t2, w1, w2, reg=1e-13):
    """Energy of rank-2 laminates with optimal amplitudes.

    Unknowns are the outer amplitude ``b`` and inner amplitudes ``aA``,
    ``aB`` (six scalars).  Leaf strains are affine in them, so the minimum
    is a 6x6 linear solve per geometry.
    """
    to, ta, tb, lam, muA, muB = rank2_leaves(geo, d)
    K = to.size
    No, NA, NB = normal_map(to), normal_map(ta), normal_map(tb)
    Z = np.zeros((K, 3, 2))
    GA = np.concatenate([-(1 - lam)[:, None, None] * No, Z, Z], 2)
    GB = np.concatenate([lam[:, None, None] * No, Z, Z], 2)
    leaves = [
        (lam * muA, GA + np.concatenate([Z, -(1 - muA)[:, None, None] * NA, Z], 2), a1, t1, w1),
        (lam * (1 - muA), GA + np.concatenate([Z, muA[:, None, None] * NA, Z], 2), a2, t2, w2),
        ((1 - lam) * muB, GB + np.concatenate([Z, Z, -(1 - muB)[:, None, None] * NB], 2), a1, t1, w1),
        ((1 - lam) * (1 - muB), GB + np.concatenate([Z, Z, muB[:, None, None] * NB], 2), a2, t2, w2),
    ]
    H = np.zeros((K, 6, 6))
    g = np.zeros((K, 6))
    E0 = np.zeros(K)
    for wk, G, a, t, w in leaves:
        r = eps - t
        H += wk[:, None, None] * np.einsum("kia,ij,kjb->kab", G, a, G)
        g += wk[:, None] * np.einsum("kia,i->ka", G, a @ r)
        E0 += wk * (0.5 * r @ a @ r + w)
    tr = np.trace(H, axis1=1, axis2=2)
    H += (reg * tr)[:, None, None] * np.eye(6)
    x = np.linalg.solve(H, g[:, :, None])[:, :, 0]
    return E0 - 0.5 * np.einsum("ka,ka->k", g, x)
