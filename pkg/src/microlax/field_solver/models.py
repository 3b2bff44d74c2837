"""Batch elastic energy models used by the field solver.

A model maps arrays ``d`` (N,) and ``eps`` (N, n) to values, first
derivatives, strain Hessians and bookkeeping (regime, translation).  The
relaxed models evaluate the closed forms through :mod:`microlax.kernels`
and continue them to all real ``d`` with the cubic Hermite blend used by
:func:`microlax.relaxed_energy.eval_extended`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DegenerateLaminate
from ..phase_energy import LinearTheoryParams, PhaseParams
from ..relaxed_energy import commutes_with_trace_op, eval_2d, gamma_star, hermite_basis


@dataclass
class BatchEval:
    value: np.ndarray
    d_d: np.ndarray
    d_eps: np.ndarray
    hess: np.ndarray
    regime: np.ndarray
    beta: np.ndarray


class LinearModel:
    """``1/2 (e - d eb) : C(d) (e - d eb)`` on a batch."""

    variant = "linear"

    def __init__(self, q: LinearTheoryParams):
        self.q = q
        self.ncomp = q.ncomp
        self.sigma_ext = q.sigma_ext

    def evaluate(self, d, eps) -> BatchEval:
        q = self.q
        d = np.asarray(d, float)
        r = eps - d[:, None] * q.eps_bar
        if q.C2 is None:
            C = np.broadcast_to(q.C, (d.size,) + q.C.shape)
        else:
            C = d[:, None, None] * q.C + (1.0 - d)[:, None, None] * q.C2
        s = np.einsum("kij,kj->ki", C, r)
        value = 0.5 * np.einsum("ki,ki->k", r, s)
        d_d = -s @ q.eps_bar
        if q.C2 is not None:
            d_d = d_d + 0.5 * np.einsum("ki,ij,kj->k", r, q.C - q.C2, r)
        z = np.zeros(d.size)
        return BatchEval(value, d_d, s, np.array(C), z.astype(np.int8), z)

    def stress_scale(self) -> float:
        mats = [self.q.C] if self.q.C2 is None else [self.q.C, self.q.C2]
        return float(max(np.linalg.norm(m, 2) for m in mats) * (np.linalg.norm(self.q.eps_bar) + 1e-300))


class RelaxedModel:
    """Closed-form relaxed energy continued to all real ``d``.

    Parameters
    ----------
    p : PhaseParams
    require_commuting : bool
        Reject Regime II/III points when the moduli do not commute with T.
    """

    variant = "relaxed"

    def __init__(self, p: PhaseParams, require_commuting: bool = True):
        self.p = p
        self.ncomp = p.ncomp
        self.sigma_ext = p.sigma_ext
        self.gamma = gamma_star(p).value if p.ncomp == 3 else 0.0
        self.commuting = p.ncomp != 3 or (commutes_with_trace_op(p.alpha1) and commutes_with_trace_op(p.alpha2))
        self.require_commuting = require_commuting

    def _raw(self, d, eps):
        p = self.p
        out = kernels.relaxed_batch(d, eps, p.alpha1, p.alpha2, p.epsT1, p.epsT2, p.w1, p.w2, self.gamma)
        value, d_d, d_eps, hess, mixed, regime, beta, status = out
        for k in np.flatnonzero(status == 1):
            # singular at gamma*: the point evaluator accepts a consistent pseudo-inverse
            r = eval_2d(float(d[k]), eps[k], p, require_commuting=False)
            value[k], d_d[k], d_eps[k], hess[k], mixed[k] = r.value, r.d_d, r.d_eps, r.hessian, r.d_eps_d
            regime[k], beta[k], status[k] = int(r.regime), r.beta_star, 0
        if np.any(status == 2):
            raise DegenerateLaminate("zero translation sensitivity at some points")
        if self.require_commuting and not self.commuting and np.any(regime >= 2):
            from ..errors import NonCommuting

            raise NonCommuting("phase moduli must commute with T in Regimes II and III")
        return value, d_d, d_eps, hess, mixed, regime, beta

    def evaluate(self, d, eps) -> BatchEval:
        d = np.asarray(d, float)
        eps = np.asarray(eps, float)
        dc = np.clip(d, 0.0, 1.0)
        value, d_d, d_eps, hess, mixed, regime, beta = self._raw(dc, eps)
        value = value.copy()
        d_d = d_d.copy()
        d_eps = d_eps.copy()
        lo = d < 0.0
        hi = d > 1.0
        if np.any(lo):
            self._blend(d, lo, value, d_d, d_eps, mixed, left=True)
        if np.any(hi):
            self._blend(d, hi, value, d_d, d_eps, mixed, left=False)
        return BatchEval(value, d_d, d_eps, hess, regime, beta)

    @staticmethod
    def _blend(d, mask, value, d_d, d_eps, mixed, left: bool):
        x = d[mask]
        v_end, m_end = value[mask], d_d[mask]
        if left:
            t = np.clip(x + 1.0, 0.0, 1.0)
            (h00, h10, h01, h11), (g00, g10, g01, g11) = hermite_basis(t)
            v = h00 * (v_end + 2.0) - h10 + h01 * v_end + h11 * m_end
            s = g00 * (v_end + 2.0) - g10 + g01 * v_end + g11 * m_end
            lin = x <= -1.0
            v = np.where(lin, 1.0 - x + v_end, v)
            s = np.where(lin, -1.0, s)
            c = np.where(lin, 0.0, h11)
        else:
            t = np.clip(x - 1.0, 0.0, 1.0)
            (h00, h10, h01, h11), (g00, g10, g01, g11) = hermite_basis(t)
            v = h00 * v_end + h10 * m_end + h01 * (v_end + 1.0) + h11
            s = g00 * v_end + g10 * m_end + g01 * (v_end + 1.0) + g11
            lin = x >= 2.0
            v = np.where(lin, x - 1.0 + v_end, v)
            s = np.where(lin, 1.0, s)
            c = np.where(lin, 0.0, h10)
        value[mask] = v
        d_d[mask] = s
        d_eps[mask] = d_eps[mask] + c[:, None] * mixed[mask]

    def stress_scale(self) -> float:
        p = self.p
        na = max(np.linalg.norm(p.alpha1, 2), np.linalg.norm(p.alpha2, 2))
        return float(na * (np.linalg.norm(p.epsT1) + np.linalg.norm(p.epsT2)))


def make_model(params, require_commuting: bool = True):
    """Model for ``PhaseParams`` (relaxed/scalar3d) or ``LinearTheoryParams``."""
    if isinstance(params, LinearTheoryParams):
        return LinearModel(params)
    if isinstance(params, PhaseParams):
        return RelaxedModel(params, require_commuting=require_commuting)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")
