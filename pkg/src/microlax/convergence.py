"""Grid and time refinement studies with successive-level errors.

``elastic``: equilibrium for a smooth fraction field on grids
``base_n * 2**k``; errors are the elastic energy difference and the RMS
difference of cell-averaged strains block-averaged onto the coarser grid.

``time``: the configured stepper from smooth initial data with
``dt = base_dt / 2**k`` and a fixed end time; the error is the L2 distance
of ``(a, b)``.

Errors compare level ``k`` with level ``k + 1``, so the last level has no
error.  For ``e_k ~ C h_k^p`` the successive differences shrink by ``2^p``
as well, and the observed order ``log2(e_k / e_{k+1})`` is not biased by
the distance of the reference to the exact solution.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .field_solver import Grid, SimConfig, Simulation, make_elastic, make_model

HEADER = ("level", "n", "dt", "quantity", "error", "order")


def smooth_fraction(grid: Grid, mean: float = 0.5, amplitude: float = 0.3) -> np.ndarray:
    c = grid.centers()
    if grid.dim == 1:
        (x,) = c
        return mean + amplitude * np.cos(np.pi * x / grid.lengths[0])
    y, x = c
    return mean + amplitude * np.sin(np.pi * x / grid.lengths[1]) * np.cos(2 * np.pi * y / grid.lengths[0])


def _orders(errors):
    out = [np.nan] * len(errors)
    for k in range(len(errors) - 1):
        if errors[k + 1] > 0 and errors[k] > 0:  # NaN compares False
            out[k + 1] = float(np.log2(errors[k] / errors[k + 1]))
    return out


def _block_mean(f: np.ndarray, k: int) -> np.ndarray:
    if f.ndim == 2:  # 1D grid: (n, ncomp)
        n = f.shape[0] // k
        return f.reshape(n, k, -1).mean(axis=1)
    ny, nx = f.shape[0] // k, f.shape[1] // k
    return f.reshape(ny, k, nx, k, -1).mean(axis=(1, 3))


def ab_distance(s, ref, grid: Grid) -> float:
    """L2 distance of the ``(a, b)`` fields of two states."""
    diff = np.concatenate([(s.a - ref.a).ravel(), (s.b - ref.b).ravel()])
    return float(np.sqrt(np.sum(diff * diff) * grid.cell_volume))


def elastic_study(params, lengths, base_n: int, levels: int, mean=0.5, amplitude=0.3, tol: float = 1e-12):
    """Rows of :data:`HEADER` for an elastic grid refinement."""
    if levels < 3:
        raise ValueError("a refinement study needs at least 3 levels")
    model = make_model(params)
    sols = []
    for k in range(levels):
        n = base_n * 2**k
        g = Grid((n,) * len(lengths), lengths)
        el = make_elastic(g, model)
        r = el.solve(smooth_fraction(g, mean, amplitude), tol=tol)
        eps = r.eps if g.dim == 1 else r.eps.reshape(g.ncells, 4, -1).mean(axis=1).reshape(g.shape + (-1,))
        sols.append((n, r.energy, eps))
    e_energy, e_strain = [], []
    for (n, E, eps), (nf, Ef, epsf) in zip(sols[:-1], sols[1:]):
        e_energy.append(abs(E - Ef))
        diff = eps - _block_mean(epsf, nf // n)
        e_strain.append(float(np.sqrt(np.mean(diff * diff))))
    e_energy.append(np.nan)
    e_strain.append(np.nan)
    rows = []
    for name, errs in (("energy", e_energy), ("strain_rms", e_strain)):
        for k, (err, order) in enumerate(zip(errs, _orders(errs))):
            rows.append([k, sols[k][0], np.nan, name, err, order])
    return rows


def time_study(cfg: SimConfig, base_dt: float, t_end: float, levels: int, amplitude: float = 0.05):
    """Rows of :data:`HEADER` for a time-step refinement of ``cfg``."""
    if levels < 3:
        raise ValueError("a refinement study needs at least 3 levels")
    g = cfg.grid
    a0 = smooth_fraction(g, cfg.a0, amplitude)
    b0 = smooth_fraction(g, cfg.b0, 0.5 * amplitude)
    finals = []
    for k in range(levels):
        dt = base_dt / 2**k
        c = replace(cfg, dt=dt, dt_adaptive=False, t_end=t_end, n_steps=None, a_init=a0, b_init=b0)
        s, _ = Simulation(c).run()
        finals.append((dt, s))
    errs = [ab_distance(s, ref, g) for (_, s), (_, ref) in zip(finals[:-1], finals[1:])]
    errs.append(np.nan)
    return [[k, g.shape[-1], finals[k][0], "ab_l2", e, o] for k, (e, o) in enumerate(zip(errs, _orders(errs)))]
