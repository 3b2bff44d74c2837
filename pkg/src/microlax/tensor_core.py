"""Small symmetric-tensor algebra in Mandel coordinates.

A symmetric 2x2 tensor ``e`` is stored as ``(e11, e22, sqrt(2) e12)`` so that
the Frobenius product ``A:B`` is the plain dot product of the vectors and
fourth-order moduli become symmetric 3x3 matrices.  One-dimensional tensors
are length-1 vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NonSPDModulus, NotSymmetric, SingularModulus

SQRT2 = np.sqrt(2.0)

#: Mandel matrix of ``T e = e - tr(e) Id`` in two dimensions.
T_MANDEL = np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
T_MANDEL.setflags(write=False)

_NCOMP = {1: 1, 2: 3}
_DIM_OF = {1: 1, 3: 2}


@dataclass(frozen=True)
class SymTensor:
    """Symmetric strain or stress value.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    components : ndarray
        Mandel vector of length 1 (``dim=1``) or 3 (``dim=2``).
    """

    dim: int
    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float).reshape(-1)
        if self.dim not in _NCOMP or c.size != _NCOMP[self.dim]:
            raise DimMismatch(f"dim={self.dim} needs {_NCOMP.get(self.dim)} components, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ValueError("tensor components must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    @classmethod
    def from_matrix(cls, m) -> "SymTensor":
        return to_mandel(m)

    def matrix(self) -> np.ndarray:
        return from_mandel(self)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.components, dtype=dtype)


@dataclass(frozen=True)
class ElasticModulus:
    """Symmetric positive-definite modulus in Mandel matrix form."""

    dim: int
    mandel_matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.mandel_matrix, dtype=float, ndmin=2)
        n = _NCOMP.get(self.dim)
        if n is None or m.shape != (n, n):
            raise DimMismatch(f"dim={self.dim} needs a {n}x{n} Mandel matrix, got {m.shape}")
        check_symmetric(m, tol=1e-14)
        if np.linalg.eigvalsh(m).min() <= 0.0:
            raise NonSPDModulus("modulus has a non-positive eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "mandel_matrix", m)

    @classmethod
    def cubic(cls, c11: float, c12: float, c44: float) -> "ElasticModulus":
        """Cubic 2D modulus from Voigt constants (C11, C12, C44)."""
        return cls(2, cubic_mandel(c11, c12, c44))

    @classmethod
    def isotropic(cls, lam: float, mu: float) -> "ElasticModulus":
        """Plane isotropic modulus from Lame constants."""
        return cls(2, cubic_mandel(lam + 2 * mu, lam, mu))

    @classmethod
    def scalar(cls, k: float) -> "ElasticModulus":
        return cls(1, np.array([[float(k)]]))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.mandel_matrix, dtype=dtype)


def cubic_mandel(c11: float, c12: float, c44: float) -> np.ndarray:
    """Mandel matrix of a cubic 2D modulus."""
    return np.array([[c11, c12, 0.0], [c12, c11, 0.0], [0.0, 0.0, 2.0 * c44]], dtype=float)


def check_symmetric(m, tol: float = 1e-12) -> np.ndarray:
    """Return ``m`` as an array, raising :class:`NotSymmetric` if needed."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.abs(m).max(), np.finfo(float).tiny)
    if np.abs(m - m.T).max() > tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    return m


def as_vector(t) -> np.ndarray:
    """Mandel components of a SymTensor, array or scalar."""
    if isinstance(t, SymTensor):
        return np.array(t.components)
    return np.atleast_1d(np.asarray(t, dtype=float)).reshape(-1)


def as_matrix(C) -> np.ndarray:
    """Mandel matrix of an ElasticModulus, array or scalar."""
    if isinstance(C, ElasticModulus):
        return np.array(C.mandel_matrix)
    return np.atleast_2d(np.asarray(C, dtype=float))


def to_mandel(m) -> SymTensor:
    """Convert a symmetric 1x1 or 2x2 matrix to Mandel form.

    Examples
    --------
    >>> to_mandel([[0.0, 1.0], [1.0, 0.0]]).components
    array([0.        , 0.        , 1.41421356])
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    check_symmetric(m, tol=1e-12)
    if m.shape == (1, 1):
        return SymTensor(1, m.reshape(1))
    if m.shape == (2, 2):
        return SymTensor(2, np.array([m[0, 0], m[1, 1], SQRT2 * 0.5 * (m[0, 1] + m[1, 0])]))
    raise DimMismatch(f"unsupported matrix shape {m.shape}")


def from_mandel(t) -> np.ndarray:
    """Inverse of :func:`to_mandel`."""
    v = as_vector(t)
    if v.size == 1:
        return v.reshape(1, 1)
    if v.size == 3:
        off = v[2] / SQRT2
        return np.array([[v[0], off], [off, v[1]]])
    raise DimMismatch(f"unsupported Mandel length {v.size}")


def _wrap(v: np.ndarray):
    return SymTensor(_DIM_OF[v.size], v) if v.size in _DIM_OF else v


def apply_modulus(C, e):
    """Return ``C e``; a SymTensor in gives a SymTensor out."""
    A = as_matrix(C)
    v = as_vector(e)
    if A.shape != (v.size, v.size):
        raise DimMismatch(f"modulus {A.shape} incompatible with vector of length {v.size}")
    out = A @ v
    return _wrap(out) if isinstance(e, SymTensor) else out


def condition_estimate(A: np.ndarray) -> float:
    """Frobenius-norm condition estimate ``|A| |A^-1|``; inf when singular."""
    try:
        inv = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        return np.inf
    return float(np.linalg.norm(A) * np.linalg.norm(inv))


def solve_modulus(A, rhs, cond_max: float = 1e12):
    """Solve ``A x = rhs`` for a small symmetric Mandel matrix.

    Raises
    ------
    SingularModulus
        If the condition estimate exceeds ``cond_max``.
    """
    M = as_matrix(A)
    v = as_vector(rhs)
    if M.shape != (v.size, v.size):
        raise DimMismatch(f"matrix {M.shape} incompatible with vector of length {v.size}")
    if condition_estimate(M) > cond_max:
        raise SingularModulus("matrix is numerically singular")
    x = np.linalg.solve(M, v)
    return _wrap(x) if isinstance(rhs, SymTensor) else x


def det_sym(t) -> float:
    """Determinant of a symmetric 2x2 tensor, ``v0 v1 - v2^2 / 2``."""
    v = as_vector(t)
    if v.size != 3:
        raise DimMismatch("det_sym needs a 2D tensor")
    return float(v[0] * v[1] - 0.5 * v[2] * v[2])


def trace_remove(e):
    """Apply ``T e = e - tr(e) Id`` to a 2D tensor."""
    v = as_vector(e)
    if v.size != 3:
        raise DimMismatch("trace removal is defined for 2D tensors")
    out = T_MANDEL @ v
    return _wrap(out) if isinstance(e, SymTensor) else out


def sym_eigenvalues(A) -> np.ndarray:
    """Ascending eigenvalues of a symmetric Mandel matrix (LAPACK ``eigh``)."""
    M = check_symmetric(as_matrix(A), tol=1e-12)
    return np.linalg.eigvalsh(0.5 * (M + M.T))


def sym_sqrt_inv(A) -> np.ndarray:
    """Inverse square root of an SPD matrix via eigendecomposition."""
    M = check_symmetric(as_matrix(A), tol=1e-12)
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    if w.min() <= 0.0:
        raise NonSPDModulus("matrix is not positive definite")
    return (V / np.sqrt(w)) @ V.T
