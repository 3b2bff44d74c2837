"""Per-phase elastic energies, the linear-theory energy and the chemical part.

All functions accept plain floats or numpy arrays where noted; the
array versions are used by the field solver on whole grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, NonSPDModulus
from .tensor_core import ElasticModulus, as_matrix, as_vector, check_symmetric

_SPACES = {1: "1d", 2: "scalar3d", 3: "2d"}


@dataclass(frozen=True)
class PhaseParams:
    """Material data of the two phases.

    Moduli and eigenstrains may be given as :class:`ElasticModulus` /
    :class:`SymTensor` objects or plain arrays.  The working space is
    inferred from the vector length: 1 for the 1D bar, 2 for anti-plane
    shear (gradient vectors with 2x2 moduli) and 3 for 2D Mandel strains.
    """

    alpha1: np.ndarray
    alpha2: np.ndarray
    epsT1: np.ndarray
    epsT2: np.ndarray
    w1: float = 0.0
    w2: float = 0.0
    sigma_ext: np.ndarray | None = None

    def __post_init__(self):
        a1, a2 = as_matrix(self.alpha1), as_matrix(self.alpha2)
        t1, t2 = as_vector(self.epsT1), as_vector(self.epsT2)
        n = t1.size
        if n not in _SPACES or t2.size != n or a1.shape != (n, n) or a2.shape != (n, n):
            raise DimMismatch("inconsistent phase parameter shapes")
        for a in (a1, a2):
            check_symmetric(a, tol=1e-14)
            if np.linalg.eigvalsh(a).min() <= 0.0:
                raise NonSPDModulus("phase modulus is not positive definite")
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError("energy offsets w1, w2 must be non-negative")
        sig = np.zeros(n) if self.sigma_ext is None else as_vector(self.sigma_ext)
        if sig.size != n:
            raise DimMismatch("sigma_ext has the wrong length")
        for name, val in (("alpha1", a1), ("alpha2", a2), ("epsT1", t1), ("epsT2", t2), ("sigma_ext", sig)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "w1", float(self.w1))
        object.__setattr__(self, "w2", float(self.w2))

    @property
    def ncomp(self) -> int:
        return self.epsT1.size

    @property
    def space(self) -> str:
        """One of ``"1d"``, ``"scalar3d"`` or ``"2d"``."""
        return _SPACES[self.ncomp]

    def phase(self, i: int):
        """Return ``(alpha_i, epsT_i, w_i)``."""
        if i == 1:
            return self.alpha1, self.epsT1, self.w1
        if i == 2:
            return self.alpha2, self.epsT2, self.w2
        raise ValueError("phase index must be 1 or 2")


@dataclass(frozen=True)
class ChemParams:
    """Chemical free-energy parameters."""

    theta: float = 1.0
    kappa1: float = 1.0
    kappa2: float = 1.0
    lam: float = 1e-3
    g_delta: float = 1e-6

    def __post_init__(self):
        if min(self.theta, self.kappa1, self.kappa2, self.lam) <= 0:
            raise ValueError("theta, kappa1, kappa2 and lam must be positive")
        if not 0.0 < self.g_delta < 0.25:
            raise ValueError("g_delta must lie in (0, 0.25)")


@dataclass(frozen=True)
class LinearTheoryParams:
    """Data of the linear-theory energy ``1/2 (e - d eb):C(d)(e - d eb)``.

    With ``C2`` unset the modulus is ``C`` for every ``d``; otherwise
    ``C(d) = d C + (1 - d) C2``.
    """

    C: np.ndarray
    eps_bar: np.ndarray
    C2: np.ndarray | None = None
    sigma_ext: np.ndarray | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        C = as_matrix(self.C)
        eb = as_vector(self.eps_bar)
        n = eb.size
        if C.shape != (n, n):
            raise DimMismatch("C and eps_bar are inconsistent")
        mats = [C] if self.C2 is None else [C, as_matrix(self.C2)]
        for m in mats:
            if m.shape != (n, n):
                raise DimMismatch("C2 has the wrong shape")
            check_symmetric(m, tol=1e-14)
            if np.linalg.eigvalsh(m).min() <= 0:
                raise NonSPDModulus("linear-theory modulus is not positive definite")
        sig = np.zeros(n) if self.sigma_ext is None else as_vector(self.sigma_ext)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "eps_bar", eb)
        object.__setattr__(self, "C2", None if self.C2 is None else mats[1])
        object.__setattr__(self, "sigma_ext", sig)

    @property
    def ncomp(self) -> int:
        return self.eps_bar.size

    def modulus(self, d):
        if self.C2 is None:
            return self.C
        return d * self.C + (1.0 - d) * self.C2


def w_micro(i: int, e, p: PhaseParams) -> float:
    """Energy ``1/2 alpha_i (e - epsT_i):(e - epsT_i) + w_i`` of phase ``i``."""
    a, t, w = p.phase(i)
    v = as_vector(e)
    if v.size != t.size:
        raise DimMismatch("strain and phase data have different sizes")
    r = v - t
    return float(0.5 * r @ a @ r + w)


def w_micro_grad(i: int, e, p: PhaseParams) -> np.ndarray:
    """Stress ``alpha_i (e - epsT_i)`` of phase ``i``."""
    a, t, _ = p.phase(i)
    v = as_vector(e)
    if v.size != t.size:
        raise DimMismatch("strain and phase data have different sizes")
    return a @ (v - t)


def w_lin(d: float, e, q: LinearTheoryParams):
    """Linear-theory energy and its derivatives.

    Returns
    -------
    value, d_d, d_eps : float, float, ndarray
    """
    v = as_vector(e)
    if v.size != q.ncomp:
        raise DimMismatch("strain has the wrong size")
    r = v - d * q.eps_bar
    C = q.modulus(d)
    s = C @ r
    value = 0.5 * r @ s
    d_d = -q.eps_bar @ s
    if q.C2 is not None:
        d_d += 0.5 * r @ (q.C - q.C2) @ r
    return float(value), float(d_d), s


def w_lin_growth_constant(q: LinearTheoryParams) -> float:
    """A constant C1 with ``|W_lin(d, e)| <= C1 (|d|^2 + |e|^2 + 1)``.

    From ``|e - d eb|^2 <= 2|e|^2 + 2 d^2 |eb|^2``.  With an interpolated
    modulus the bound holds for ``d`` in [0, 1] only.
    """
    mats = [q.C] if q.C2 is None else [q.C, q.C2]
    lmax = max(np.linalg.eigvalsh(m).max() for m in mats)
    return float(lmax * max(1.0, float(q.eps_bar @ q.eps_bar)))


def w_ext(e, p) -> float:
    """Load potential ``-e : sigma_ext``."""
    v = as_vector(e)
    sig = p.sigma_ext
    if v.size != sig.size:
        raise DimMismatch("strain and applied stress differ in size")
    return float(-v @ sig)


def g_reg(s, delta: float = 1e-6):
    """Regularised entropy ``s ln s + (1 - s) ln(1 - s)``.

    Exact on ``[delta, 1 - delta]``; outside, the second-order Taylor
    polynomial about the nearer threshold, so the result is C2 and convex
    on the whole real line.

    Returns
    -------
    value, first, second : float or ndarray
    """
    s_arr = np.asarray(s, dtype=float)
    lo, hi = delta, 1.0 - delta
    c = np.clip(s_arr, lo, hi)
    gv = c * np.log(c) + (1.0 - c) * np.log1p(-c)
    g1 = np.log(c) - np.log1p(-c)
    g2 = 1.0 / (c * (1.0 - c))
    h = s_arr - c
    value = gv + g1 * h + 0.5 * g2 * h * h
    first = g1 + g2 * h
    second = g2
    if np.ndim(s) == 0:
        return float(value), float(first), float(second)
    return value, first, second


def g_is_exact(s, delta: float = 1e-6):
    """True where :func:`g_reg` uses the exact logarithm."""
    s = np.asarray(s)
    return (s >= delta) & (s <= 1.0 - delta)


def psi(a, b, c: ChemParams):
    """Chemical energy density and its partial derivatives.

    ``psi = theta/2 (g(a+b) + g(a-b)) + kappa1 a (1-a) - kappa2 b^2``.
    """
    gp, gp1, _ = g_reg(np.add(a, b), c.g_delta)
    gm, gm1, _ = g_reg(np.subtract(a, b), c.g_delta)
    h = 0.5 * c.theta
    value = h * (gp + gm) + c.kappa1 * np.multiply(a, np.subtract(1.0, a)) - c.kappa2 * np.square(b)
    d_a = h * (gp1 + gm1) + c.kappa1 * (1.0 - 2.0 * np.asarray(a))
    d_b = h * (gp1 - gm1) - 2.0 * c.kappa2 * np.asarray(b)
    if np.ndim(value) == 0:
        return float(value), float(d_a), float(d_b)
    return value, d_a, d_b


def psi_second(a, b, c: ChemParams):
    """Second derivatives ``(psi_aa, psi_ab, psi_bb)``."""
    _, _, gp2 = g_reg(np.add(a, b), c.g_delta)
    _, _, gm2 = g_reg(np.subtract(a, b), c.g_delta)
    h = 0.5 * c.theta
    return h * (gp2 + gm2) - 2.0 * c.kappa1, h * (gp2 - gm2), h * (gp2 + gm2) - 2.0 * c.kappa2


__all__ = [
    "ElasticModulus",
    "PhaseParams",
    "ChemParams",
    "LinearTheoryParams",
    "w_micro",
    "w_micro_grad",
    "w_lin",
    "w_lin_growth_constant",
    "w_ext",
    "g_reg",
    "g_is_exact",
    "psi",
    "psi_second",
]
