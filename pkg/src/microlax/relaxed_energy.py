"""Closed-form relaxed (laminate) elastic energies and their derivatives.

Point evaluators
----------------
``eval_1d``        bar problem, harmonic-mean type closed form.
``eval_2d``        plane strain with the translation parameter ``beta``
                   selected by the sign of ``phi`` on ``[0, gamma*]``.
``eval_scalar3d``  anti-plane shear; identical algebra with ``beta = 0``.
``eval_extended``  any of the above continued to all real ``d``.

All evaluators return a :class:`RelaxedEval`.  Derivatives are the
envelope-theorem forms, valid in every regime:

* ``d_eps = d1 sigma1 + d2 sigma2`` with ``sigma_i = alpha_i (eps_i* - t_i)``
* ``d_d = sigma_bar : Delta + W1 - W2 + (d1 - d2) beta phi``

where ``Delta = eps2* - eps1*`` and ``d1 = d``, ``d2 = 1 - d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import DegenerateLaminate, DimMismatch, NonCommuting, RootNotBracketed, SingularAlpha
from .phase_energy import LinearTheoryParams, PhaseParams, w_lin
from .tensor_core import T_MANDEL, as_vector, condition_estimate, sym_sqrt_inv

COND_MAX = 1e12
GAMMA_SHRINK = 1e-8
COMMUTE_TOL = 1e-10


class RegimeLabel(IntEnum):
    """Microstructure regime of a relaxed-energy evaluation."""

    Zero = 0
    One = 1
    Two = 2
    Three = 3


@dataclass(frozen=True)
class GammaStar:
    """Largest admissible translation and its per-phase parts."""

    value: float
    gamma1: float
    gamma2: float


@dataclass
class RelaxedEval:
    """Result of a relaxed-energy evaluation.

    Attributes
    ----------
    value : float
        Energy density.
    d_d : float
        Partial derivative in the phase fraction.
    d_eps : ndarray
        Partial derivative in the macroscopic strain (the mean stress).
    regime : RegimeLabel
    beta_star : float
        Optimal translation parameter.
    eps1_star, eps2_star : ndarray
        Optimal phase strains; ``d eps1* + (1 - d) eps2* = eps``.
    phi_at_beta : float
        ``phi`` evaluated at ``beta_star`` (zero in Regime II).
    hessian : ndarray
        Second derivative in the strain.  In Regime II it includes the
        sensitivity of ``beta_star``.
    d_eps_d : ndarray
        Mixed derivative of the mean stress in ``d``.
    d_beta_d : float
        Sensitivity of ``beta_star`` to ``d`` (nonzero only in Regime II).
    d_beta_eps : ndarray
        Sensitivity of ``beta_star`` to the strain.
    """

    value: float
    d_d: float
    d_eps: np.ndarray
    regime: RegimeLabel
    beta_star: float
    eps1_star: np.ndarray
    eps2_star: np.ndarray
    phi_at_beta: float = 0.0
    hessian: np.ndarray | None = None
    d_eps_d: np.ndarray | None = None
    d_beta_d: float = 0.0
    d_beta_eps: np.ndarray | None = None
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# translation machinery


def _trace_op(n: int) -> np.ndarray:
    return T_MANDEL if n == 3 else np.zeros((n, n))


def gamma_star(p: PhaseParams) -> GammaStar:
    """Largest translation keeping both ``alpha_i - beta T`` semidefinite.

    ``gamma_i`` is the reciprocal of the largest eigenvalue of
    ``alpha_i^{-1/2} T alpha_i^{-1/2}``.

    Examples
    --------
    >>> import numpy as np
    >>> from microlax.tensor_core import cubic_mandel
    >>> c = cubic_mandel(3, 1, 1)
    >>> gamma_star(PhaseParams(c, c, np.zeros(3), np.zeros(3))).value
    2.0000000000000004
    """
    cached = p.__dict__.get("_gamma_star")
    if cached is not None:
        return cached
    if p.ncomp != 3:
        raise DimMismatch("gamma_star is defined for 2D strains only")
    gam = []
    for a in (p.alpha1, p.alpha2):
        s = sym_sqrt_inv(a)
        top = np.linalg.eigvalsh(s @ T_MANDEL @ s).max()
        gam.append(float(1.0 / top))
    out = GammaStar(min(gam), gam[0], gam[1])
    object.__setattr__(p, "_gamma_star", out)
    return out


def alpha_mix(beta: float, d: float, p: PhaseParams) -> np.ndarray:
    """Translated mixture modulus ``d2 alpha1 + d1 alpha2 - beta T``."""
    return (1.0 - d) * p.alpha1 + d * p.alpha2 - beta * _trace_op(p.ncomp)


def jump_vector(e, p: PhaseParams) -> np.ndarray:
    """``alpha2 (t2 - eps) - alpha1 (t1 - eps)``."""
    v = as_vector(e)
    if v.size != p.ncomp:
        raise DimMismatch("strain size does not match phase data")
    return p.alpha2 @ (p.epsT2 - v) - p.alpha1 @ (p.epsT1 - v)


def _solve_alpha(A: np.ndarray, rhs: np.ndarray, cond_max: float) -> np.ndarray:
    if condition_estimate(A) > cond_max:
        raise SingularAlpha("translated mixture modulus is numerically singular")
    return np.linalg.solve(A, rhs)


def _det(v: np.ndarray) -> float:
    return float(v[0] * v[1] - 0.5 * v[2] * v[2])


def phi(beta: float, d: float, e, p: PhaseParams, cond_max: float = COND_MAX) -> float:
    """``-det`` of the phase strain jump at translation ``beta``.

    Raises
    ------
    SingularAlpha
        If ``alpha(beta, d)`` is numerically singular.
    """
    if p.ncomp != 3:
        raise DimMismatch("phi is defined for 2D strains only")
    delta = _solve_alpha(alpha_mix(beta, d, p), jump_vector(e, p), cond_max)
    return -_det(delta)


def _homogeneous_tol(e, p: PhaseParams) -> float:
    v = as_vector(e)
    na = np.linalg.norm(p.alpha1) + np.linalg.norm(p.alpha2)
    ne = np.linalg.norm(v) + np.linalg.norm(p.epsT1) + np.linalg.norm(p.epsT2) + 1.0
    return 1e-12 * na * ne


def is_homogeneous(e, p: PhaseParams) -> bool:
    """True when the jump vector vanishes (energy independent of microstructure)."""
    return bool(np.linalg.norm(jump_vector(e, p)) <= _homogeneous_tol(e, p))


def bisect_root(f, lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    """Root of an increasing function by bisection on ``[lo, hi]``.

    Raises
    ------
    RootNotBracketed
        If ``f(lo) > 0`` or ``f(hi) < 0``.
    """
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise RootNotBracketed(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_regime(d: float, e, p: PhaseParams):
    """Regime label and optimal translation ``beta_star``.

    Regime 0 when the jump vector vanishes, I when ``phi(0) > 0``,
    III when ``phi`` is still negative just below ``gamma*``, II otherwise
    with ``beta_star`` the bisection root of ``phi``.
    """
    _check_fraction(d)
    if is_homogeneous(e, p):
        return RegimeLabel.Zero, 0.0
    gs = gamma_star(p).value
    f = lambda b: phi(b, d, e, p, cond_max=np.inf)  # noqa: E731
    f0 = f(0.0)
    if f0 > 0:
        return RegimeLabel.One, 0.0
    gc = gs * (1.0 - GAMMA_SHRINK)
    if f(gc) < 0:
        return RegimeLabel.Three, gs
    if f0 == 0:
        return RegimeLabel.Two, 0.0
    tol = max(1e-14, 1e-12 * gs)
    return RegimeLabel.Two, bisect_root(f, 0.0, gc, tol)


def _check_fraction(d: float) -> None:
    if not (0.0 <= d <= 1.0):
        raise ValueError(f"phase fraction must lie in [0, 1], got {d}")


def commutes_with_trace_op(a: np.ndarray, tol: float = COMMUTE_TOL) -> bool:
    """True when ``a T = T a`` up to ``tol`` relative."""
    return bool(np.linalg.norm(a @ T_MANDEL - T_MANDEL @ a) <= tol * np.linalg.norm(a))


# ---------------------------------------------------------------------------
# evaluators


def eval_fixed_beta(d: float, e, p: PhaseParams, beta: float = 0.0, cond_max: float = COND_MAX) -> RelaxedEval:
    """Relaxed-energy algebra at a prescribed translation ``beta``.

    Works for every strain length (``beta`` must be 0 unless 2D).  The
    returned regime is One; callers overwrite it.
    """
    v = as_vector(e)
    n = p.ncomp
    if v.size != n:
        raise DimMismatch("strain size does not match phase data")
    if beta != 0.0 and n != 3:
        raise DimMismatch("nonzero translation needs 2D strains")
    Tm = _trace_op(n)
    a1, a2, t1, t2 = p.alpha1, p.alpha2, p.epsT1, p.epsT2
    d1, d2 = float(d), 1.0 - float(d)
    A = d2 * a1 + d1 * a2 - beta * Tm
    jump = p.alpha2 @ (t2 - v) - p.alpha1 @ (t1 - v)
    pseudo = False
    if condition_estimate(A) <= cond_max:
        Ainv = np.linalg.inv(A)
    elif beta != 0.0:
        Ainv = _consistent_pinv(A, jump)
        pseudo = True
    else:
        raise SingularAlpha("translated mixture modulus is numerically singular")
    delta = Ainv @ jump
    x1 = v - d2 * delta
    x2 = v + d1 * delta
    s1 = a1 @ (x1 - t1)
    s2 = a2 @ (x2 - t2)
    W1 = 0.5 * (x1 - t1) @ s1 + p.w1
    W2 = 0.5 * (x2 - t2) @ s2 + p.w2
    det_delta = _det(delta) if n == 3 else 0.0
    value = d1 * W1 + d2 * W2 + beta * d1 * d2 * det_delta
    sbar = d1 * s1 + d2 * s2
    d_d = sbar @ delta + W1 - W2 + (d1 - d2) * beta * (-det_delta)
    da = a1 - a2
    hess = d1 * a1 + d2 * a2 - d1 * d2 * da @ Ainv @ da
    ddelta_dd = -Ainv @ (a2 - a1) @ delta
    mixed = s1 - s2 + (d1 * a1 + d2 * a2) @ delta + d1 * d2 * (a2 - a1) @ ddelta_dd
    out = RelaxedEval(
        value=float(value),
        d_d=float(d_d),
        d_eps=sbar,
        regime=RegimeLabel.One,
        beta_star=float(beta),
        eps1_star=x1,
        eps2_star=x2,
        phi_at_beta=-det_delta,
        hessian=0.5 * (hess + hess.T),
        d_eps_d=mixed,
        d_beta_eps=np.zeros(n),
    )
    out.extra.update(Ainv=Ainv, delta=delta, sigma1=s1, sigma2=s2, W1=float(W1), W2=float(W2), pseudo_inverse=pseudo)
    return out


def _consistent_pinv(A: np.ndarray, rhs: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Pseudo-inverse of a singular translated modulus at ``beta = gamma*``.

    When both ``alpha_i - gamma* T`` share a null vector ``v``, the jump is
    orthogonal to ``v`` and energy, mean stress and Hessian do not depend
    on the ``v`` component of ``Delta``; the minimum-norm solution is then
    as good as any.  An inconsistent right-hand side still raises.
    """
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    keep = np.abs(w) > 1e-12 * np.abs(w).max()
    Ainv = (V[:, keep] / w[keep]) @ V[:, keep].T
    scale = np.linalg.norm(rhs) + np.finfo(float).tiny
    if np.linalg.norm(A @ (Ainv @ rhs) - rhs) > rtol * scale:
        raise SingularAlpha("translated mixture modulus is singular and the jump is not in its range")
    return Ainv


def _translation_sensitivity(res: RelaxedEval, p: PhaseParams) -> None:
    """Add the ``beta_star`` sensitivities of a Regime II point in place."""
    Ainv = res.extra["Ainv"]
    delta = res.extra["delta"]
    Td = T_MANDEL @ delta
    w = Ainv @ Td
    phi_b = float(Td @ w)
    scale = max(float(delta @ delta), np.finfo(float).tiny)
    if phi_b <= 1e-14 * scale * np.linalg.norm(Ainv):
        raise DegenerateLaminate("phi has zero slope in beta at the Regime II root")
    da = p.alpha1 - p.alpha2
    g = da @ w
    res.d_beta_eps = -g / phi_b
    res.d_beta_d = float(w @ (p.alpha2 - p.alpha1) @ delta / phi_b)
    res.extra["phi_beta"] = phi_b
    res.extra["g"] = g


def eval_2d(
    d: float,
    e,
    p: PhaseParams,
    *,
    require_commuting: bool = True,
    beta_eps_term: bool = False,
) -> RelaxedEval:
    """Relaxed energy of a two-phase plane-strain mixture.

    Parameters
    ----------
    d : float
        Volume fraction of phase 1, in [0, 1].
    e : SymTensor or array_like
        Macroscopic strain, Mandel components.
    p : PhaseParams
        2D phase data.
    require_commuting : bool
        Reject moduli that do not commute with ``T`` in Regimes II/III.
    beta_eps_term : bool
        Add ``d_beta_eps d1 d2 det(Delta)`` to the stress.  The term
        vanishes identically in Regimes II and III; kept for diagnostics.

    Raises
    ------
    SingularAlpha, NonCommuting, DegenerateLaminate
    """
    if p.ncomp != 3:
        raise DimMismatch("eval_2d needs 2D phase data")
    _check_fraction(d)
    regime, beta = classify_regime(d, e, p)
    if require_commuting and regime in (RegimeLabel.Two, RegimeLabel.Three):
        if not (commutes_with_trace_op(p.alpha1) and commutes_with_trace_op(p.alpha2)):
            raise NonCommuting("phase moduli must commute with T in Regimes II and III")
    res = eval_fixed_beta(d, e, p, beta)
    res.regime = regime
    if regime == RegimeLabel.Two and 0.0 < d < 1.0:
        _translation_sensitivity(res, p)
        d1, d2 = d, 1.0 - d
        g = res.extra["g"]
        res.hessian = res.hessian + d1 * d2 * np.outer(g, g) / res.extra["phi_beta"]
        Ainv = res.extra["Ainv"]
        ddelta = Ainv @ T_MANDEL @ res.extra["delta"] * res.d_beta_d
        res.d_eps_d = res.d_eps_d + d1 * d2 * (p.alpha2 - p.alpha1) @ ddelta
    if beta_eps_term:
        d1, d2 = d, 1.0 - d
        res.d_eps = res.d_eps + res.d_beta_eps * d1 * d2 * (-res.phi_at_beta)
    return res


def eval_1d(d: float, eps: float, p: PhaseParams) -> RelaxedEval:
    """Relaxed energy of a two-phase bar.

    The optimal phase strains carry equal stress; with
    ``den = d2 alpha1 + d1 alpha2`` they read

    ``eps1* = (alpha2 (eps - d2 t2) + d2 alpha1 t1) / den``
    ``eps2* = (alpha1 (eps - d1 t1) + d1 alpha2 t2) / den``.

    Examples
    --------
    >>> p = PhaseParams([[1.0]], [[2.0]], [0.0], [1.0])
    >>> r = eval_1d(0.5, 0.5, p)
    >>> float(r.eps1_star[0]), float(r.eps2_star[0]), r.value
    (0.0, 1.0, 0.0)
    """
    if p.ncomp != 1:
        raise DimMismatch("eval_1d needs 1D phase data")
    _check_fraction(d)
    a1, a2 = float(p.alpha1[0, 0]), float(p.alpha2[0, 0])
    t1, t2 = float(p.epsT1[0]), float(p.epsT2[0])
    e = float(as_vector(eps)[0])
    d1, d2 = float(d), 1.0 - float(d)
    den = d2 * a1 + d1 * a2
    x1 = (a2 * (e - d2 * t2) + d2 * a1 * t1) / den
    x2 = (a1 * (e - d1 * t1) + d1 * a2 * t2) / den
    W1 = 0.5 * a1 * (x1 - t1) ** 2 + p.w1
    W2 = 0.5 * a2 * (x2 - t2) ** 2 + p.w2
    value = d1 * W1 + d2 * W2
    k = a1 * a2 / den
    mean_t = d1 * t1 + d2 * t2
    sigma = k * (e - mean_t)
    d_d = W1 - W2 + a1 * a2 / den**2 * (
        (a1 - a2) * e * e
        + d1 * a1 * t1 * t1
        - d2 * a2 * t2 * t2
        + (a2 * t2 - a1 * t1 + (a2 - a1) * mean_t) * e
        + (d2 * a1 - d1 * a2) * t1 * t2
    )
    mixed = k * (t2 - t1) - sigma * (a2 - a1) / den
    return RelaxedEval(
        value=float(value),
        d_d=float(d_d),
        d_eps=np.array([sigma]),
        regime=RegimeLabel.One,
        beta_star=0.0,
        eps1_star=np.array([x1]),
        eps2_star=np.array([x2]),
        phi_at_beta=0.0,
        hessian=np.array([[k]]),
        d_eps_d=np.array([mixed]),
        d_beta_eps=np.zeros(1),
    )


def eval_scalar3d(d: float, f, p: PhaseParams) -> RelaxedEval:
    """Relaxed energy in anti-plane shear.

    ``f`` is the macroscopic out-of-plane displacement gradient, ``p``
    holds 2x2 SPD moduli and 2-vector eigen-gradients.  The optimal
    translation is always zero.
    """
    if p.ncomp != 2:
        raise DimMismatch("eval_scalar3d needs 2-vector phase data")
    _check_fraction(d)
    res = eval_fixed_beta(d, f, p, 0.0)
    res.regime = RegimeLabel.Zero if is_homogeneous(f, p) else RegimeLabel.One
    return res


def evaluate(d: float, e, p, **kwargs) -> RelaxedEval:
    """Dispatch to the evaluator matching the parameter space."""
    if isinstance(p, LinearTheoryParams):
        return eval_linear(d, e, p)
    if p.space == "1d":
        return eval_1d(d, e, p)
    if p.space == "scalar3d":
        return eval_scalar3d(d, e, p)
    return eval_2d(d, e, p, **kwargs)


def eval_linear(d: float, e, q: LinearTheoryParams) -> RelaxedEval:
    """Linear-theory energy wrapped as a :class:`RelaxedEval`."""
    value, d_d, d_eps = w_lin(d, e, q)
    C = q.modulus(d)
    mixed = -C @ q.eps_bar
    if q.C2 is not None:
        mixed = mixed + (q.C - q.C2) @ (as_vector(e) - d * q.eps_bar)
    v = as_vector(e)
    return RelaxedEval(
        value=value,
        d_d=d_d,
        d_eps=d_eps,
        regime=RegimeLabel.Zero,
        beta_star=0.0,
        eps1_star=v.copy(),
        eps2_star=v.copy(),
        hessian=np.array(C),
        d_eps_d=mixed,
        d_beta_eps=np.zeros(v.size),
    )


# ---------------------------------------------------------------------------
# extension to all real d


def hermite_basis(t: float):
    """Cubic Hermite basis ``(h00, h10, h01, h11)`` and their t-derivatives."""
    t2, t3 = t * t, t * t * t
    h = (2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2)
    dh = (6 * t2 - 6 * t, 3 * t2 - 4 * t + 1, -6 * t2 + 6 * t, 3 * t2 - 2 * t)
    return h, dh


def eval_extended(d: float, e, p, mode: str = "auto", **kwargs) -> RelaxedEval:
    """Relaxed energy continued to every real ``d``.

    For ``d <= -1`` the value is ``1 - d + W(0, e)`` and for ``d >= 2`` it is
    ``d - 1 + W(1, e)``.  On ``(-1, 0)`` and ``(1, 2)`` a cubic Hermite
    blend in ``d`` matches values and ``d``-slopes at both ends, so the
    result is C1 in ``d``.  The strain Hessian in the blend zones is the
    one of the nearest in-range endpoint.

    Parameters
    ----------
    mode : {"auto", "1d", "2d", "scalar3d", "linear"}
        Evaluator to extend; ``auto`` picks from the parameter type.
    """
    fn = _evaluator_for(e, p, mode, kwargs)
    d = float(d)
    if 0.0 <= d <= 1.0:
        return fn(d)
    if isinstance(p, LinearTheoryParams):
        return fn(d)
    if d < 0.0:
        end = fn(0.0)
        if d <= -1.0:
            return _shifted(end, value=1.0 - d + end.value, d_d=-1.0, d_eps=end.d_eps, mixed=0 * end.d_eps)
        (h00, h10, h01, h11), (g00, g10, g01, g11) = hermite_basis(d + 1.0)
        v0, m0, v1, m1 = end.value + 2.0, -1.0, end.value, end.d_d
        value = h00 * v0 + h10 * m0 + h01 * v1 + h11 * m1
        slope = g00 * v0 + g10 * m0 + g01 * v1 + g11 * m1
        d_eps = end.d_eps + h11 * end.d_eps_d
        return _shifted(end, value=value, d_d=slope, d_eps=d_eps, mixed=g11 * end.d_eps_d)
    end = fn(1.0)
    if d >= 2.0:
        return _shifted(end, value=d - 1.0 + end.value, d_d=1.0, d_eps=end.d_eps, mixed=0 * end.d_eps)
    (h00, h10, h01, h11), (g00, g10, g01, g11) = hermite_basis(d - 1.0)
    v0, m0, v1, m1 = end.value, end.d_d, end.value + 1.0, 1.0
    value = h00 * v0 + h10 * m0 + h01 * v1 + h11 * m1
    slope = g00 * v0 + g10 * m0 + g01 * v1 + g11 * m1
    d_eps = end.d_eps + h10 * end.d_eps_d
    return _shifted(end, value=value, d_d=slope, d_eps=d_eps, mixed=g10 * end.d_eps_d)


def _evaluator_for(e, p, mode: str, kwargs):
    table = {"1d": eval_1d, "2d": eval_2d, "scalar3d": eval_scalar3d, "linear": eval_linear}
    if mode == "auto":
        return lambda dd: evaluate(dd, e, p, **kwargs)
    if mode not in table:
        raise ValueError(f"unknown mode {mode!r}")
    fn = table[mode]
    if mode == "2d":
        return lambda dd: fn(dd, e, p, **kwargs)
    return lambda dd: fn(dd, e, p)


def _shifted(end: RelaxedEval, value, d_d, d_eps, mixed) -> RelaxedEval:
    return RelaxedEval(
        value=float(value),
        d_d=float(d_d),
        d_eps=np.asarray(d_eps, dtype=float),
        regime=end.regime,
        beta_star=end.beta_star,
        eps1_star=end.eps1_star,
        eps2_star=end.eps2_star,
        phi_at_beta=end.phi_at_beta,
        hessian=end.hessian,
        d_eps_d=np.asarray(mixed, dtype=float),
        d_beta_eps=end.d_beta_eps,
        extra={"endpoint": end},
    )


# ---------------------------------------------------------------------------
# growth and monotonicity probe


@dataclass
class ProbeReport:
    """Sampled monotonicity and growth constants of an energy.

    ``c1_hat`` is the smallest monotonicity quotient observed and
    ``C1_hat`` the largest of the three growth ratios (listed separately in
    ``growth``).  ``passed`` means ``c1_hat > 0`` and ``C1_hat`` finite.
    """

    c1_hat: float
    C1_hat: float
    growth: dict
    n_samples: int
    passed: bool


def assumption_A_probe(
    p,
    n_samples: int = 10_000,
    seed: int = 0,
    strain_scale: float = 1.0,
    d_range=(0.0, 1.0),
    require_commuting: bool = True,
) -> ProbeReport:
    """Sample strong monotonicity of the stress and growth of the energy.

    Draws ``d`` uniformly in ``d_range`` and strain pairs uniformly in
    ``[-strain_scale, strain_scale]^n`` with ``numpy.random.default_rng(seed)``
    and evaluates the batch kernels.

    * ``c1_hat = min (s(d, e2) - s(d, e1)) . (e2 - e1) / |e2 - e1|^2``
    * ``C1_hat = max`` of ``|W| / (d^2 + |e|^2 + 1)``,
      ``|W_d| / (d^2 + |e|^2 + 1)`` and ``|s| / (|d| + |e| + 1)``.

    Examples
    --------
    >>> q = LinearTheoryParams(np.eye(3), np.zeros(3))
    >>> round(assumption_A_probe(q, n_samples=100).c1_hat, 12)
    1.0
    """
    from .field_solver.models import make_model

    model = make_model(p, require_commuting=require_commuting)
    n = model.ncomp
    rng = np.random.default_rng(seed)
    d = rng.uniform(d_range[0], d_range[1], n_samples)
    e1 = rng.uniform(-strain_scale, strain_scale, (n_samples, n))
    e2 = rng.uniform(-strain_scale, strain_scale, (n_samples, n))
    r1 = model.evaluate(d, e1)
    r2 = model.evaluate(d, e2)
    de = e2 - e1
    c1 = np.einsum("ki,ki->k", r2.d_eps - r1.d_eps, de) / np.einsum("ki,ki->k", de, de)
    growth = {}
    for name, r, e in (("e1", r1, e1), ("e2", r2, e2)):
        ne = np.linalg.norm(e, axis=1)
        quad = d * d + ne * ne + 1.0
        lin = np.abs(d) + ne + 1.0
        growth.setdefault("value", []).append(np.abs(r.value) / quad)
        growth.setdefault("d_d", []).append(np.abs(r.d_d) / quad)
        growth.setdefault("d_eps", []).append(np.linalg.norm(r.d_eps, axis=1) / lin)
    growth = {k: float(np.max(v)) for k, v in growth.items()}
    c1_hat = float(np.min(c1))
    C1_hat = max(growth.values())
    return ProbeReport(c1_hat, C1_hat, growth, n_samples, bool(c1_hat > 0 and np.isfinite(C1_hat)))
