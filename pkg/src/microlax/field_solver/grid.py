"""Cell-centred grids, Neumann Laplacian and its spectral inverse.

Fields are stored as arrays of shape ``(nx,)`` in 1D and ``(ny, nx)`` in
2D.  The 5-point (3-point in 1D) Neumann Laplacian with mirrored ghost
cells is diagonalised by the type-II DCT, which gives exact solves for the
implicit parts of the steppers and for the Green operator.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft

from ..errors import SolverStall


def fft_workers() -> int:
    """Thread count for scipy.fft, capped by ``MICROLAX_THREADS``."""
    try:
        return max(1, int(os.environ.get("MICROLAX_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on ``[0, Lx] (x [0, Ly])``.

    Parameters
    ----------
    shape : tuple of int
        ``(nx,)`` or ``(ny, nx)`` cells; at least 4 per axis.
    lengths : tuple of float
        Physical side lengths in the same order.
    """

    shape: tuple
    lengths: tuple

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        lengths = tuple(float(v) for v in self.lengths)
        if len(shape) not in (1, 2) or len(lengths) != len(shape):
            raise ValueError("grid must be 1D or 2D with matching lengths")
        if min(shape) < 4:
            raise ValueError("need at least 4 cells per axis")
        if min(lengths) <= 0:
            raise ValueError("grid lengths must be positive")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def uniform(cls, dim: int, n: int, length: float = 1.0) -> "Grid":
        return cls((n,) * dim, (length,) * dim)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def ncells(self) -> int:
        return int(np.prod(self.shape))

    def centers(self):
        """Cell-centre coordinates, one array per axis (``meshgrid`` in 2D)."""
        axes = [(np.arange(n) + 0.5) * h for n, h in zip(self.shape, self.spacing)]
        if self.dim == 1:
            return axes
        return np.meshgrid(*axes, indexing="ij")

    def laplacian_symbol(self) -> np.ndarray:
        """Eigenvalues ``-k2 <= 0`` of the Neumann Laplacian in DCT-II order."""
        parts = []
        for n, h in zip(self.shape, self.spacing):
            k = np.arange(n)
            parts.append(-(2.0 / h**2) * (1.0 - np.cos(np.pi * k / n)))
        if self.dim == 1:
            return parts[0]
        return parts[0][:, None] + parts[1][None, :]


def dct(f: np.ndarray) -> np.ndarray:
    return scipy.fft.dctn(f, type=2, norm="ortho", workers=fft_workers())


def idct(f: np.ndarray) -> np.ndarray:
    return scipy.fft.idctn(f, type=2, norm="ortho", workers=fft_workers())


def laplacian_neumann(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order Neumann Laplacian with mirrored ghost cells.

    The stencil is conservative: its output sums to zero up to round-off.
    """
    f = np.asarray(field, dtype=float)
    out = np.zeros_like(f)
    for ax, h in enumerate(grid.spacing):
        flux = np.diff(f, axis=ax) / h  # interior faces
        zero = np.zeros_like(np.take(f, [0], axis=ax))
        full = np.concatenate([zero, flux, zero], axis=ax)
        out += np.diff(full, axis=ax) / h
    return out


def face_gradients(field: np.ndarray, grid: Grid):
    """Interior-face differences per axis (boundary faces carry zero flux)."""
    return [np.diff(field, axis=ax) / h for ax, h in enumerate(grid.spacing)]


def gradient_energy(field: np.ndarray, grid: Grid) -> float:
    """``1/2 int |grad f|^2`` with face differences, consistent with the stencil."""
    V = grid.cell_volume
    return float(0.5 * V * sum(np.sum(g * g) for g in face_gradients(field, grid)))


def green_apply(f: np.ndarray, grid: Grid, mobility: float = 1.0, tol: float = 1e-12) -> np.ndarray:
    """Mean-zero solution ``w`` of ``-M Lap_h w = f``.

    A mean component of ``f`` larger than ``tol * |f|`` is projected out.
    The solve is exact in the DCT basis.

    Raises
    ------
    SolverStall
        If the result is not finite.
    """
    f = np.asarray(f, dtype=float)
    fm = f - f.mean() if abs(f.mean()) * f.size > tol * np.linalg.norm(f) else f
    sym = grid.laplacian_symbol()
    fh = dct(fm)
    wh = np.zeros_like(fh)
    nz = sym != 0
    wh[nz] = fh[nz] / (-mobility * sym[nz])
    w = idct(wh)
    if not np.all(np.isfinite(w)):
        raise SolverStall("Green operator produced non-finite values")
    return w


def m_norm_sq(f: np.ndarray, grid: Grid, mobility: float = 1.0) -> float:
    """``|f|_M^2 = sum f G f`` times cell volume for mean-zero ``f``."""
    return float(np.sum(f * green_apply(f, grid, mobility)) * grid.cell_volume)


def flux_field(mu: np.ndarray, grid: Grid, mobility: float = 1.0):
    """Face fluxes ``J = -M grad mu`` including zero boundary faces.

    Returns a list with one array per axis; along axis ``k`` the array has
    one more entry than the field (all faces).
    """
    out = []
    for ax, h in enumerate(grid.spacing):
        inner = -mobility * np.diff(mu, axis=ax) / h
        zero = np.zeros_like(np.take(mu, [0], axis=ax))
        out.append(np.concatenate([zero, inner, zero], axis=ax))
    return out


def flux_divergence(J, grid: Grid) -> np.ndarray:
    """Cell divergence of face fluxes from :func:`flux_field`."""
    return sum(np.diff(Jk, axis=ax) / h for ax, (Jk, h) in enumerate(zip(J, grid.spacing)))
