"""Brute-force verifiers for the closed-form relaxed energies.

* :func:`scan_1d` minimises the two-phase bar energy over a strain grid.
* :func:`laminate_search_2d` builds explicit rank-1 and rank-2 laminates.
* :func:`cell_problem_min` minimises a finite-element periodic-free cell
  problem with a stochastic search over phase layouts.
* :func:`fd_check` compares analytic derivatives with central differences.

Each returns an energy that is attained by an admissible competitor, hence
an upper bound for the relaxed energy (up to round-off).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import DimMismatch, SolverStall
from .phase_energy import PhaseParams, w_micro
from .relaxed_energy import GAMMA_SHRINK, RegimeLabel, gamma_star, is_homogeneous, phi
from .tensor_core import as_vector

ANNEAL_SEED = 0x5EED


# ---------------------------------------------------------------------------
# 1D scan


def _parabola_vertex(x, y):
    """Vertex of the parabola through three points; None if not convex."""
    (x0, x1, x2), (y0, y1, y2) = x, y
    den = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den
    if a <= 0:
        return None
    return -b / (2 * a)


def scan_1d(d: float, eps: float, p: PhaseParams, n_grid: int = 2001) -> float:
    """Minimum of ``d W1(e1) + (1-d) W2((eps - d e1)/(1-d))`` over ``e1``.

    The grid spans ``[eps - 5D, eps + 5D]`` with
    ``D = |t2 - t1| + |eps| + 1``; the window is widened when the minimiser
    sits on its edge.  Two parabolic refinements polish the grid minimum.

    Examples
    --------
    >>> p = PhaseParams([[1.0]], [[2.0]], [0.0], [1.0])
    >>> abs(scan_1d(0.5, 0.5, p)) < 1e-9
    True
    """
    if p.ncomp != 1:
        raise DimMismatch("scan_1d needs 1D phase data")
    if not 0.0 <= d < 1.0:
        raise ValueError("scan_1d needs d in [0, 1)")
    if n_grid < 1000:
        raise ValueError("scan_1d needs at least 1000 grid points")
    eps = float(as_vector(eps)[0])
    if d == 0.0:
        return w_micro(2, eps, p)
    a1, a2 = float(p.alpha1[0, 0]), float(p.alpha2[0, 0])
    t1, t2 = float(p.epsT1[0]), float(p.epsT2[0])

    def f(e1):
        e2 = (eps - d * e1) / (1.0 - d)
        return d * (0.5 * a1 * (e1 - t1) ** 2 + p.w1) + (1.0 - d) * (0.5 * a2 * (e2 - t2) ** 2 + p.w2)

    half = 5.0 * (abs(t2 - t1) + abs(eps) + 1.0)
    lo, hi = eps - half, eps + half
    for _ in range(60):
        xs = np.linspace(lo, hi, n_grid)
        ys = f(xs)
        k = int(np.argmin(ys))
        if 0 < k < n_grid - 1:
            break
        width = hi - lo
        lo, hi = (lo - width, hi) if k == 0 else (lo, hi + width)
    best_x, best = xs[k], ys[k]
    step = xs[1] - xs[0]
    for _ in range(2):
        x3 = np.array([best_x - step, best_x, best_x + step])
        v = _parabola_vertex(x3, f(x3))
        if v is None:
            break
        fv = f(v)
        if fv < best:
            best_x, best = v, fv
        step *= 1e-3
    return float(best)


# ---------------------------------------------------------------------------
# laminates


@dataclass
class LaminateCandidate:
    """Explicit laminate competitor.

    Attributes
    ----------
    rank : int
    angles : tuple of float
        Layer normal angles; rank 2 lists ``(outer, branch A, branch B)``.
    fractions : tuple of float
        Rank 1: ``(d,)``.  Rank 2: ``(lam, muA, muB)``.
    leaf_strains : list of ndarray
    leaf_phases : list of int
    leaf_weights : list of float
    energy : float
    """

    rank: int
    angles: tuple
    fractions: tuple
    leaf_strains: list
    leaf_phases: list
    leaf_weights: list
    energy: float
    extra: dict = field(default_factory=dict)


def _phase_tuple(p: PhaseParams):
    return p.alpha1, p.alpha2, p.epsT1, p.epsT2, p.w1, p.w2


def rank1_candidate(theta: float, d: float, e, p: PhaseParams) -> LaminateCandidate:
    """Rank-1 laminate with normal angle ``theta`` and optimal amplitude."""
    eps = as_vector(e)
    a1, a2, t1, t2, w1, w2 = _phase_tuple(p)
    Nm = kernels.normal_map(np.array([theta]))[0]
    jump = a2 @ (t2 - eps) - a1 @ (t1 - eps)
    A0 = (1.0 - d) * a1 + d * a2
    amp = np.linalg.solve(Nm.T @ A0 @ Nm, Nm.T @ jump)
    x1 = eps - (1.0 - d) * Nm @ amp
    x2 = eps + d * Nm @ amp
    energy = d * w_micro(1, x1, p) + (1.0 - d) * w_micro(2, x2, p)
    return LaminateCandidate(1, (theta,), (d,), [x1, x2], [1, 2], [d, 1.0 - d], float(energy))


def rank2_candidate(geo, d: float, e, p: PhaseParams, reg: float = 1e-13) -> LaminateCandidate:
    """Rank-2 laminate for a geometry row ``(to, tA, tB, lam, s)``."""
    eps = as_vector(e)
    to, ta, tb, lam, muA, muB = (float(v[0]) for v in kernels.rank2_leaves(np.atleast_2d(geo), d))
    No, NA, NB = (kernels.normal_map(np.array([t]))[0] for t in (to, ta, tb))
    Z = np.zeros((3, 2))
    GA = np.hstack([-(1 - lam) * No, Z, Z])
    GB = np.hstack([lam * No, Z, Z])
    maps = [
        (lam * muA, GA + np.hstack([Z, -(1 - muA) * NA, Z]), 1),
        (lam * (1 - muA), GA + np.hstack([Z, muA * NA, Z]), 2),
        ((1 - lam) * muB, GB + np.hstack([Z, Z, -(1 - muB) * NB]), 1),
        ((1 - lam) * (1 - muB), GB + np.hstack([Z, Z, muB * NB]), 2),
    ]
    H = np.zeros((6, 6))
    g = np.zeros(6)
    for wk, G, ph in maps:
        a, t, _ = p.phase(ph)
        H += wk * G.T @ a @ G
        g += wk * G.T @ a @ (eps - t)
    H += reg * np.trace(H) * np.eye(6)
    x = -np.linalg.solve(H, g)
    strains = [eps + G @ x for _, G, _ in maps]
    weights = [wk for wk, _, _ in maps]
    phases = [ph for _, _, ph in maps]
    energy = sum(wk * w_micro(ph, s, p) for wk, s, ph in zip(weights, strains, phases))
    return LaminateCandidate(2, (to, ta, tb), (lam, muA, muB), strains, phases, weights, float(energy))


def laminate_search_2d(
    d: float,
    e,
    p: PhaseParams,
    n_angles: int = 720,
    n_fractions: int = 200,
    rank2: bool = True,
    polish: bool = True,
    n_polish: int = 5,
):
    """Smallest laminate energy found over rank-1 and rank-2 trees.

    Rank-1 laminates are scanned over ``n_angles`` normals in ``[0, pi)``;
    the phase fraction is ``d`` and leaf strains follow from traction
    continuity in closed form.  Rank-2 trees are scanned on a coarse grid of
    ``max(8, n_angles // 60)`` angles per normal and
    ``max(6, n_fractions // 25)`` values per fraction parameter, then the
    best ``n_polish`` geometries are refined by Nelder-Mead.  With
    ``polish`` the best rank-1 angle is also refined.

    Returns
    -------
    energy : float
        Upper bound for the relaxed energy.
    best : LaminateCandidate
        The minimising competitor; ``best.extra`` holds the rank-1 and
        rank-2 minima separately.
    """
    if p.ncomp != 3:
        raise DimMismatch("laminate_search_2d needs 2D phase data")
    eps = as_vector(e)
    args = (d, eps) + _phase_tuple(p)
    if d in (0.0, 1.0):
        i = 1 if d == 1.0 else 2
        en = w_micro(i, eps, p)
        cand = LaminateCandidate(0, (), (d,), [eps, eps], [1, 2], [d, 1 - d], en)
        cand.extra.update(rank1=en, rank2=en)
        return en, cand
    theta = np.linspace(0.0, np.pi, int(n_angles), endpoint=False)
    e1 = kernels.rank1_energies(theta, *args)
    k = int(np.argmin(e1))
    th_best, r1 = float(theta[k]), float(e1[k])
    if polish:
        dth = np.pi / n_angles
        res = scipy.optimize.minimize_scalar(
            lambda t: float(kernels.rank1_energies(np.array([t]), *args)[0]),
            bounds=(th_best - dth, th_best + dth),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < r1:
            th_best, r1 = float(res.x), float(res.fun)
    best = rank1_candidate(th_best, d, eps, p)
    best.energy = min(best.energy, r1)
    r2 = np.inf
    if rank2:
        na = max(8, n_angles // 60)
        nf = max(6, n_fractions // 25)
        ang = np.linspace(0.0, np.pi, na, endpoint=False)
        lam = np.linspace(0.02, 0.98, nf)
        s = np.linspace(0.0, 1.0, nf)
        grid = np.stack(np.meshgrid(ang, ang, ang, lam, s, indexing="ij"), -1).reshape(-1, 5)
        en = kernels.rank2_energies(grid, *args)
        order = np.argsort(en, kind="stable")
        r2_geo = grid[order[0]]
        r2 = float(en[order[0]])
        if polish:

            def obj(x):
                x = np.array(x, dtype=float)
                x[3] = min(max(x[3], 1e-6), 1 - 1e-6)
                x[4] = min(max(x[4], 0.0), 1.0)
                return float(kernels.rank2_energies(x[None, :], *args)[0])

            for j in order[:n_polish]:
                res = scipy.optimize.minimize(
                    obj, grid[j], method="Nelder-Mead", options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-15}
                )
                if res.fun < r2:
                    r2, r2_geo = float(res.fun), np.array(res.x)
        if r2 < best.energy:
            cand = rank2_candidate(r2_geo, d, eps, p)
            best = cand
    best.extra.update(rank1=r1, rank2=r2)
    return float(min(r1, r2)), best


def regime_margin(d: float, e, p: PhaseParams) -> float:
    """Distance of ``phi`` from the nearest regime switch.

    Regime I: ``phi(0)``; Regime III: ``-phi(gamma*)``; Regime II:
    ``min(-phi(0), phi(gamma*))``.  Used to screen finite-difference
    checks away from regime boundaries.  Regime 0 returns ``inf``.
    """
    if p.ncomp != 3:
        return np.inf
    if is_homogeneous(e, p):
        return np.inf
    gc = gamma_star(p).value * (1.0 - GAMMA_SHRINK)
    f0 = phi(0.0, d, e, p, cond_max=np.inf)
    fg = phi(gc, d, e, p, cond_max=np.inf)
    if f0 > 0:
        return f0
    if fg < 0:
        return -fg
    return min(-f0, fg)


# ---------------------------------------------------------------------------
# cell problem


@dataclass
class CellProblem:
    """Discrete cell problem on the unit square.

    Attributes
    ----------
    n : int
        Cells per side.
    phase : ndarray of shape (n, n)
        1 where phase 1 occupies the cell, 0 for phase 2; indexed ``[iy, ix]``.
    strain : ndarray
        Affine boundary strain (Mandel).
    """

    n: int
    phase: np.ndarray
    strain: np.ndarray

    def __post_init__(self):
        self.phase = np.asarray(self.phase, dtype=np.int8).reshape(self.n, self.n)
        self.strain = as_vector(self.strain)

    @property
    def fraction(self) -> float:
        return float(self.phase.mean())


_GP = np.array([-1.0, 1.0]) / np.sqrt(3.0)


def q1_strain_operator(nx: int, ny: int, hx: float, hy: float, ncomp: int = 3) -> sp.csr_matrix:
    """Sparse map from nodal values to Gauss-point strains (2x2 Gauss, Q1).

    Nodes are numbered ``iy * (nx + 1) + ix``.  For ``ncomp == 3`` there
    are two displacement dofs per node (``2 * node + c``) and rows are
    Mandel strain components; for ``ncomp == 2`` there is one scalar dof
    per node and rows are gradient components.  Row order is
    ``((cell * 4 + gp) * ncomp + comp)`` with cells numbered ``iy * nx + ix``.
    """
    rows, cols, vals = [], [], []
    # local nodes: (0,0), (1,0), (1,1), (0,1) in (x, y)
    lx = np.array([0, 1, 1, 0])
    ly = np.array([0, 0, 1, 1])
    sx = 2 * lx - 1
    sy = 2 * ly - 1
    dN = []
    for gy in _GP:
        for gx in _GP:
            dNdx = sx * (1 + sy * gy) / 4.0 * 2.0 / hx
            dNdy = sy * (1 + sx * gx) / 4.0 * 2.0 / hy
            dN.append((dNdx, dNdy))
    cy, cx = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    cell = (cy * nx + cx).ravel()
    nodes = ((cy.ravel()[:, None] + ly[None, :]) * (nx + 1) + cx.ravel()[:, None] + lx[None, :])
    s2 = 1.0 / np.sqrt(2.0)
    for g, (dx, dy) in enumerate(dN):
        base = (cell * 4 + g) * ncomp
        for a in range(4):
            nd = nodes[:, a]
            if ncomp == 3:
                entries = [
                    (0, 2 * nd, dx[a]),
                    (1, 2 * nd + 1, dy[a]),
                    (2, 2 * nd, s2 * dy[a]),
                    (2, 2 * nd + 1, s2 * dx[a]),
                ]
            else:
                entries = [(0, nd, dx[a]), (1, nd, dy[a])]
            for comp, col, v in entries:
                rows.append(base + comp)
                cols.append(col)
                vals.append(np.full(cell.size, v))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    ndof = (nx + 1) * (ny + 1) * (2 if ncomp == 3 else 1)
    return sp.csr_matrix((vals, (rows, cols)), shape=(nx * ny * 4 * ncomp, ndof))


class _CellSolver:
    """Quadratic cell problem for fixed phase layout, warm-started CG."""

    def __init__(self, n: int, p: PhaseParams, strain: np.ndarray):
        self.n = n
        self.p = p
        h = 1.0 / n
        self.B = q1_strain_operator(n, n, h, h, 3)
        self.wgp = h * h / 4.0
        iy, ix = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        x = ix.ravel() * h
        y = iy.ravel() * h
        boundary = (ix.ravel() == 0) | (ix.ravel() == n) | (iy.ravel() == 0) | (iy.ravel() == n)
        E = np.array([[strain[0], strain[2] / np.sqrt(2)], [strain[2] / np.sqrt(2), strain[1]]])
        ub = np.zeros(2 * (n + 1) ** 2)
        ub[0::2] = E[0, 0] * x + E[0, 1] * y
        ub[1::2] = E[1, 0] * x + E[1, 1] * y
        fixed = np.repeat(boundary, 2)
        self.free = np.nonzero(~fixed)[0]
        self.u0 = np.where(fixed, ub, 0.0)
        self.u = self.u0.copy()
        self.strain = strain

    def energy(self, phase: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000) -> float:
        p = self.p
        ngp = self.n * self.n * 4
        ph = np.repeat(phase.ravel(), 4)
        a = np.where(ph[:, None, None] == 1, p.alpha1, p.alpha2)
        t = np.where(ph[:, None] == 1, p.epsT1, p.epsT2)
        w = np.where(ph == 1, p.w1, p.w2)
        D = _block_diag3(a * self.wgp)
        K = (self.B.T @ D @ self.B).tocsr()
        f = self.B.T @ (np.einsum("kij,kj->ki", a, t).ravel() * self.wgp)
        Kff = K[self.free][:, self.free]
        rhs = f[self.free] - K[self.free] @ self.u0
        diag = Kff.diagonal()
        M = sp.diags(1.0 / diag)
        x0 = self.u[self.free]
        info_iters = [0]

        def cb(_):
            info_iters[0] += 1

        sol, info = spla.cg(Kff, rhs, x0=x0, rtol=tol, atol=0.0, maxiter=max_iter, M=M, callback=cb)
        if info > 0:
            raise SolverStall(f"cell-problem CG did not converge in {max_iter} iterations")
        u = self.u0.copy()
        u[self.free] = sol
        self.u = u
        eps = (self.B @ u).reshape(ngp, 3)
        r = eps - t
        return float(np.sum(self.wgp * (0.5 * np.einsum("ki,kij,kj->k", r, a, r) + w)))


def _block_diag3(blocks: np.ndarray) -> sp.csr_matrix:
    """Block-diagonal sparse matrix from a (K, m, m) stack."""
    K, m, _ = blocks.shape
    base = np.arange(K)[:, None, None] * m
    rows = np.broadcast_to(base + np.arange(m)[None, :, None], blocks.shape).ravel()
    cols = np.broadcast_to(base + np.arange(m)[None, None, :], blocks.shape).ravel()
    return sp.csr_matrix((blocks.ravel(), (rows, cols)), shape=(K * m, K * m))


def stripe_layout(n: int, d: float, theta: float = 0.0) -> np.ndarray:
    """Finest stripe pattern with normal angle ``theta`` and mean ``d``.

    Cells are grouped into layers by their projection on the normal; whole
    layers are assigned by a Bresenham sequence so phase 1 covers a fraction
    ``d`` of layers, then single cells of the last touched layer are flipped
    until exactly ``round(d n^2)`` cells are phase 1.
    """
    c = (np.arange(n) + 0.5) / n
    y, x = np.meshgrid(c, c, indexing="ij")
    s = x * np.cos(theta) + y * np.sin(theta)
    step = 1.0 / n * max(abs(np.cos(theta)), abs(np.sin(theta)))
    layer = np.floor((s - s.min()) / step + 1e-9).astype(int)
    L = layer.max() + 1
    seq = np.floor((np.arange(L) + 1) * d) - np.floor(np.arange(L) * d)
    phase = seq[layer].astype(np.int8)
    target = int(round(d * n * n))
    flat = phase.ravel()
    order = np.lexsort((np.arange(n * n), layer.ravel()))
    diff = target - int(flat.sum())
    if diff > 0:
        cand = [i for i in order[::-1] if flat[i] == 0]
        flat[cand[:diff]] = 1
    elif diff < 0:
        cand = [i for i in order[::-1] if flat[i] == 1]
        flat[cand[: -diff]] = 0
    return flat.reshape(n, n)


def cell_problem_min(
    cp: CellProblem,
    p: PhaseParams,
    anneal_steps: int = 200,
    seed: int = ANNEAL_SEED,
    temperature: float = 1e-3,
    tol: float = 1e-10,
    return_layout: bool = False,
):
    """Upper bound for the relaxed energy from a discrete cell problem.

    For a fixed layout the elastic energy is minimised over bilinear
    displacements with the affine boundary values prescribed exactly
    (Jacobi-preconditioned CG to relative residual ``tol``).  A simulated
    annealing search then swaps phase-1/phase-2 neighbours across
    interfaces.  The temperature decreases linearly from
    ``temperature * |E0|`` to zero; the random stream is
    ``numpy.random.default_rng(seed)``.

    Raises
    ------
    SolverStall
        If CG needs more than 1e5 iterations.
    """
    if p.ncomp != 3:
        raise DimMismatch("cell problems are implemented for 2D strains")
    solver = _CellSolver(cp.n, p, cp.strain)
    layout = cp.phase.copy()
    E = solver.energy(layout, tol)
    best, best_layout, best_u = E, layout.copy(), solver.u.copy()
    rng = np.random.default_rng(seed)
    n = cp.n
    T0 = temperature * max(abs(E), 1e-12)
    for k in range(anneal_steps):
        if layout.min() == layout.max():
            break
        Tk = T0 * (1.0 - k / max(anneal_steps, 1))
        ones = np.argwhere(layout == 1)
        i, j = ones[rng.integers(len(ones))]
        nbrs = [(i + di, j + dj) for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)) if 0 <= i + di < n and 0 <= j + dj < n]
        nbrs = [q for q in nbrs if layout[q] == 0]
        if not nbrs:
            continue
        q = nbrs[rng.integers(len(nbrs))]
        layout[i, j], layout[q] = 0, 1
        u_prev = solver.u.copy()
        En = solver.energy(layout, tol)
        accept = En <= E or (Tk > 0 and rng.random() < np.exp(-(En - E) / Tk))
        if accept:
            E = En
            if E < best:
                best, best_layout, best_u = E, layout.copy(), solver.u.copy()
        else:
            layout[i, j], layout[q] = 1, 0
            solver.u = u_prev
    if return_layout:
        return best, best_layout, best_u
    return best


# ---------------------------------------------------------------------------
# finite differences


def _unpack(res):
    if hasattr(res, "value"):
        return float(res.value), float(res.d_d), np.atleast_1d(np.asarray(res.d_eps, float))
    value, d_d, d_eps = res
    return float(value), float(d_d), np.atleast_1d(np.asarray(d_eps, float))


def fd_check(evaluator, point, h: float | None = None) -> float:
    """Largest discrepancy between analytic and central-difference derivatives.

    Parameters
    ----------
    evaluator : callable
        ``evaluator(d, eps)`` returning a RelaxedEval or ``(value, d_d, d_eps)``.
    point : tuple
        ``(d, eps)``.
    h : float, optional
        Step; defaults to ``1e-5 * max(1, |d|, |eps|_inf)``.

    Returns
    -------
    float
        ``max_k |g_k - fd_k| / max(1, |fd|_inf)`` over the ``d`` and strain
        components.
    """
    d, eps = point
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    if h is None:
        h = 1e-5 * max(1.0, abs(d), float(np.abs(eps).max()))
    _, g_d, g_e = _unpack(evaluator(d, eps))
    fd = [(_unpack(evaluator(d + h, eps))[0] - _unpack(evaluator(d - h, eps))[0]) / (2 * h)]
    for k in range(eps.size):
        ek = np.zeros_like(eps)
        ek[k] = h
        fd.append((_unpack(evaluator(d, eps + ek))[0] - _unpack(evaluator(d, eps - ek))[0]) / (2 * h))
    fd = np.array(fd)
    an = np.concatenate([[g_d], g_e])
    return float(np.abs(an - fd).max() / max(1.0, np.abs(fd).max()))


__all__ = [
    "ANNEAL_SEED",
    "CellProblem",
    "LaminateCandidate",
    "RegimeLabel",
    "cell_problem_min",
    "fd_check",
    "laminate_search_2d",
    "q1_strain_operator",
    "rank1_candidate",
    "rank2_candidate",
    "regime_margin",
    "scan_1d",
    "stripe_layout",
]
