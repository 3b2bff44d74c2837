"""Elastic equilibrium sub-solves.

1D: stress equals the applied stress in every cell, and the stress is
affine in the strain for each fixed ``d``, so the strain is recovered
exactly cell by cell.

2D and anti-plane shear: bilinear (Q1) nodal unknowns with 2x2 Gauss
points, Newton iterations on the total elastic energy with the
regime-aware tangent, Jacobi-preconditioned CG for the linear systems and
a backtracking line search.  Rigid motions are removed by pinning node
(0, 0) (both components) and the vertical component of node (nx, 0); in
anti-plane shear the value at node (0, 0) is pinned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import NewtonDivergence, SolverStall
from ..oracle import _block_diag3, q1_strain_operator
from .grid import Grid


@dataclass
class ElasticResult:
    u: np.ndarray
    eps: np.ndarray
    residual: float
    iterations: int
    energy: float
    eval: object


class Elastic1D:
    """Closed-form equilibrium of a bar under end traction ``sigma_ext``."""

    def __init__(self, grid: Grid, model):
        if grid.dim != 1 or model.ncomp != 1:
            raise ValueError("Elastic1D needs a 1D grid and 1D energy")
        self.grid = grid
        self.model = model
        self.h = grid.spacing[0]
        self.sigma = float(model.sigma_ext[0])
        self.ngp = grid.ncells
        self.weights = np.full(grid.ncells, self.h)

    def gp_fraction(self, d_cells: np.ndarray) -> np.ndarray:
        return np.asarray(d_cells, float).ravel()

    def cell_average(self, gp_values: np.ndarray) -> np.ndarray:
        return gp_values

    def strains(self, u: np.ndarray) -> np.ndarray:
        return (np.diff(u) / self.h)[:, None]

    def energy_terms(self, d_cells, u):
        eps = self.strains(u)
        ev = self.model.evaluate(self.gp_fraction(d_cells), eps)
        energy = float(np.sum(self.h * (ev.value - eps[:, 0] * self.sigma)))
        return energy, ev, eps

    def solve(self, d_cells, u0=None, tol: float = 0.0) -> ElasticResult:
        d = self.gp_fraction(d_cells)
        n = d.size
        m = self.model
        f0 = m.evaluate(d, np.zeros((n, 1))).d_eps[:, 0]
        f1 = m.evaluate(d, np.ones((n, 1))).d_eps[:, 0]
        k = f1 - f0
        eps = (self.sigma - f0) / k
        ev = m.evaluate(d, eps[:, None])
        r = ev.d_eps[:, 0] - self.sigma
        eps = eps - r / k
        ev = m.evaluate(d, eps[:, None])
        r = ev.d_eps[:, 0] - self.sigma
        u = np.concatenate([[0.0], np.cumsum(eps * self.h)])
        energy = float(np.sum(self.h * (ev.value - eps * self.sigma)))
        return ElasticResult(u, eps[:, None], float(np.abs(r).max()), 1, energy, ev)


class ElasticFE:
    """Q1 finite-element equilibrium on a 2D grid.

    Parameters
    ----------
    grid : Grid
        2D grid of shape ``(ny, nx)``.
    model : energy model with ``ncomp`` 3 (plane strain) or 2 (anti-plane).
    max_newton : int
        Newton iteration cap; exceeded raises :class:`NewtonDivergence`.
    """

    def __init__(self, grid: Grid, model, max_newton: int = 50, cg_rtol: float = 1e-12, cg_maxiter: int = 100_000):
        if grid.dim != 2 or model.ncomp not in (2, 3):
            raise ValueError("ElasticFE needs a 2D grid and 2D or anti-plane energy")
        self.grid = grid
        self.model = model
        ny, nx = grid.shape
        hy, hx = grid.spacing
        self.nx, self.ny = nx, ny
        self.hmin = min(hx, hy)
        self.n = model.ncomp
        self.B = q1_strain_operator(nx, ny, hx, hy, self.n)
        self.BT = self.B.T.tocsr()
        self.wgp = hx * hy / 4.0
        self.ngp = nx * ny * 4
        self.weights = np.full(self.ngp, self.wgp)
        dofs_per_node = 2 if self.n == 3 else 1
        self.ndof = (nx + 1) * (ny + 1) * dofs_per_node
        fixed = [0, 1, 2 * nx + 1] if self.n == 3 else [0]
        mask = np.ones(self.ndof, bool)
        mask[fixed] = False
        self.free = np.nonzero(mask)[0]
        self.fixed = np.array(fixed)
        self.sig = np.asarray(model.sigma_ext, float)
        self.max_newton = max_newton
        self.cg_rtol = cg_rtol
        self.cg_maxiter = cg_maxiter

    def gp_fraction(self, d_cells: np.ndarray) -> np.ndarray:
        return np.repeat(np.asarray(d_cells, float).ravel(), 4)

    def cell_average(self, gp_values: np.ndarray) -> np.ndarray:
        return gp_values.reshape(-1, 4).mean(axis=1).reshape(self.grid.shape)

    def zero_field(self) -> np.ndarray:
        return np.zeros(self.ndof)

    def strains(self, u: np.ndarray) -> np.ndarray:
        return (self.B @ u).reshape(self.ngp, self.n)

    def _energy(self, dg, u):
        eps = self.strains(u)
        ev = self.model.evaluate(dg, eps)
        energy = float(np.sum(self.wgp * (ev.value - eps @ self.sig)))
        return energy, ev, eps

    def energy_terms(self, d_cells, u):
        return self._energy(self.gp_fraction(d_cells), u)

    def _residual(self, ev):
        r = self.BT @ (self.wgp * (ev.d_eps - self.sig[None, :])).ravel()
        r[self.fixed] = 0.0
        return r

    def residual_norm(self, r: np.ndarray) -> float:
        """Largest nodal force divided by the mesh size (stress units)."""
        return float(np.abs(r).max() / self.hmin)

    def solve(self, d_cells, u0=None, tol: float = 1e-9) -> ElasticResult:
        dg = self.gp_fraction(d_cells)
        u = self.zero_field() if u0 is None else np.array(u0, float)
        u[self.fixed] = 0.0
        E, ev, eps = self._energy(dg, u)
        r = self._residual(ev)
        res = self.residual_norm(r)
        it = 0
        while res > tol:
            if it >= self.max_newton:
                raise NewtonDivergence(f"elastic Newton not converged after {it} iterations (residual {res:.3e})")
            it += 1
            K = (self.BT @ _block_diag3(self.wgp * ev.hess) @ self.B).tocsr()
            Kff = K[self.free][:, self.free]
            diag = Kff.diagonal()
            M = sp.diags(1.0 / diag)
            rhs = -r[self.free]
            du_f, info = spla.cg(Kff, rhs, rtol=self.cg_rtol, atol=0.0, maxiter=self.cg_maxiter, M=M)
            if info > 0:
                raise SolverStall(f"elastic CG did not converge in {self.cg_maxiter} iterations")
            du = np.zeros(self.ndof)
            du[self.free] = du_f
            slope = float(r @ du)
            s = 1.0
            for _ in range(30):
                un = u + s * du
                En, evn, epsn = self._energy(dg, un)
                if En <= E + 1e-4 * s * slope or abs(En - E) <= 1e-15 * max(1.0, abs(E)):
                    break
                s *= 0.5
            else:
                raise NewtonDivergence("elastic line search failed")
            u, E, ev, eps = un, En, evn, epsn
            r = self._residual(ev)
            res = self.residual_norm(r)
        return ElasticResult(u, eps, res, it, E, ev)


def make_elastic(grid: Grid, model, **kwargs):
    if grid.dim == 1:
        return Elastic1D(grid, model)
    return ElasticFE(grid, model, **kwargs)
