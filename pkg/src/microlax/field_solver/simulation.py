"""Time integration of the coupled conserved/non-conserved system.

Unknowns are cell fields ``a`` (conserved) and ``b`` (non-conserved) and
the nodal displacement ``u`` at elastic equilibrium for ``d = a + b``.
With the energy

    F = sum V [psi(a, b) + W(d, eps(u)) - eps(u) : sigma_ext]
        + lam/2 (|grad a|^2 + |grad b|^2),

the evolution is

    da/dt = lam M Lap mu,          mu  = psi_a + W_d - c_g Lap a,
    db/dt = lam M Lap b - M (psi_b + W_d),

where ``c_g = lam`` for the energy-consistent convention (default) and
``c_g = 1`` for the ``"explicit"`` convention.  Two steppers are offered:
a linearly implicit spectral scheme with energy-based step rejection and
a minimizing-movement scheme that descends the penalised energy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import StepFailure
from ..phase_energy import ChemParams, LinearTheoryParams, PhaseParams, psi, psi_second
from .elastic import make_elastic
from .grid import (
    Grid,
    dct,
    flux_field as _flux_field,
    gradient_energy,
    green_apply,
    idct,
    laplacian_neumann,
    m_norm_sq,
)
from .models import make_model

VARIANTS = ("linear", "relaxed", "scalar3d")
STEPPERS = ("semi_implicit", "minimizing_movement")


@dataclass
class SimConfig:
    """Resolved simulation settings.

    Parameters
    ----------
    params : PhaseParams or LinearTheoryParams
        Elastic data.  ``relaxed`` needs 1 (1D) or 3 (2D) strain
        components, ``scalar3d`` needs 2, ``linear`` takes
        :class:`LinearTheoryParams`.
    grid : Grid
    chem : ChemParams
    dt : float
        Initial (and maximal) time step.
    dt_adaptive : bool
        Grow the step back towards ``dt`` after rejections.
    t_end, n_steps : float, int
        Stop at whichever is reached first; at least one must be given.
    mu_convention : {"energy", "explicit"}
        Gradient coefficient in the chemical potential: ``lam`` or 1.
    stab_a, stab_b : float
        Linear stabilisation constants of the spectral stepper.
    tol_elast : float or None
        Elastic residual tolerance; ``None`` means
        ``1e-9 (|sigma_ext| + stress scale) + 1e-12``.
    """

    params: object
    grid: Grid
    chem: ChemParams = field(default_factory=ChemParams)
    variant: str = "relaxed"
    mobility: float = 1.0
    dt: float = 1e-4
    dt_adaptive: bool = True
    t_end: float | None = None
    n_steps: int | None = None
    stepper: str = "semi_implicit"
    mu_convention: str = "energy"
    stab_a: float = 0.0
    stab_b: float = 0.0
    tol_elast: float | None = None
    newton_max: int = 50
    tol_mm: float = 1e-8
    mm_max_iter: int = 500
    max_halvings: int = 20
    energy_slack: float = 1e-9
    range_delta: float = 1e-6
    a0: float = 0.5
    b0: float = 0.0
    noise: float = 1e-3
    seed: int = 0
    a_init: np.ndarray | None = None
    b_init: np.ndarray | None = None
    freeze_a: bool = False
    require_commuting: bool = True
    output_every: int = 1
    snapshot_every: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.stepper not in STEPPERS:
            raise ValueError(f"stepper must be one of {STEPPERS}")
        if self.mu_convention not in ("energy", "explicit"):
            raise ValueError("mu_convention must be 'energy' or 'explicit'")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.mobility > 0:
            raise ValueError("mobility must be positive")
        if self.t_end is not None and self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.n_steps is not None and self.n_steps < 0:
            raise ValueError("n_steps must be non-negative")
        p = self.params
        if self.variant == "linear":
            if not isinstance(p, LinearTheoryParams):
                raise ValueError("variant 'linear' needs LinearTheoryParams")
        elif not isinstance(p, PhaseParams):
            raise ValueError(f"variant '{self.variant}' needs PhaseParams")
        ncomp = p.ncomp
        want = {1: 1, 2: 3}[self.grid.dim] if self.variant != "scalar3d" else 2
        if self.variant == "scalar3d" and self.grid.dim != 2:
            raise ValueError("variant 'scalar3d' runs on a 2D grid")
        if ncomp != want:
            raise ValueError(f"{self.grid.dim}D grid with variant '{self.variant}' needs {want} strain components, got {ncomp}")
        if self.stepper == "minimizing_movement" and self.mu_convention != "energy":
            raise ValueError("the minimizing-movement stepper requires mu_convention='energy'")

    @property
    def c_grad(self) -> float:
        return self.chem.lam if self.mu_convention == "energy" else 1.0


@dataclass
class SimState:
    """Fields and clocks of a simulation."""

    a: np.ndarray
    b: np.ndarray
    u: np.ndarray
    mu: np.ndarray
    time: float = 0.0
    step: int = 0
    dt: float = 0.0
    energy: float = float("nan")
    residual: float = 0.0

    @property
    def d(self) -> np.ndarray:
        return self.a + self.b


@dataclass
class Diagnostics:
    """One row of the per-step record."""

    step: int
    time: float
    dt: float
    energy: float
    mass: float
    sum_min: float
    sum_max: float
    diff_min: float
    diff_max: float
    residual: float
    energy_change: float
    rejections: int = 0
    inner_iterations: int = 0
    merit_change: float = 0.0

    FIELDS = (
        "step",
        "time",
        "dt",
        "energy",
        "mass",
        "sum_min",
        "sum_max",
        "diff_min",
        "diff_max",
        "residual",
        "energy_change",
        "rejections",
        "inner_iterations",
        "merit_change",
    )

    def row(self):
        return [getattr(self, k) for k in self.FIELDS]


@dataclass
class _Terms:
    energy: float
    d_a: np.ndarray  # psi_a + W_d (cell fields)
    d_b: np.ndarray  # psi_b + W_d
    u: np.ndarray
    residual: float


class Simulation:
    """Discrete operators and steppers bound to one :class:`SimConfig`."""

    def __init__(self, config: SimConfig):
        self.cfg = config
        self.grid = config.grid
        self.model = make_model(config.params, require_commuting=config.require_commuting)
        self.elastic = make_elastic(self.grid, self.model, max_newton=config.newton_max) if self.grid.dim == 2 else make_elastic(self.grid, self.model)
        self.V = self.grid.cell_volume
        self.k2 = -self.grid.laplacian_symbol()
        if config.tol_elast is None:
            scale = float(np.linalg.norm(self.model.sigma_ext)) + self.model.stress_scale()
            self.tol_elast = 1e-9 * scale + 1e-12
        else:
            self.tol_elast = float(config.tol_elast)
        self._range_warned = False

    # energy and potentials
    def terms(self, a, b, u_warm=None) -> _Terms:
        """Elastic solve for ``d = a + b`` and the energy with its partials."""
        g = self.grid
        d = a + b
        res = self.elastic.solve(d, u_warm, tol=self.tol_elast)
        ev = res.eval
        W_d = np.asarray(self.elastic.cell_average(ev.d_d)).reshape(g.shape)
        pv, pa, pb = psi(a, b, self.cfg.chem)
        lam = self.cfg.chem.lam
        energy = (
            float(np.sum(pv) * self.V)
            + lam * (gradient_energy(a, g) + gradient_energy(b, g))
            + res.energy
        )
        return _Terms(energy, pa + W_d, pb + W_d, res.u, res.residual)

    def chemical_potential(self, a, t: _Terms) -> np.ndarray:
        return t.d_a - self.cfg.c_grad * laplacian_neumann(a, self.grid)

    def b_force(self, b, t: _Terms) -> np.ndarray:
        """L2 gradient of the energy in ``b``."""
        return t.d_b - self.cfg.chem.lam * laplacian_neumann(b, self.grid)

    def initial_state(self) -> SimState:
        cfg = self.cfg
        shape = self.grid.shape
        rng = np.random.default_rng(cfg.seed)
        if cfg.a_init is not None:
            a = np.array(cfg.a_init, float).reshape(shape)
        else:
            a = cfg.a0 + cfg.noise * rng.uniform(-1.0, 1.0, shape)
        if cfg.b_init is not None:
            b = np.array(cfg.b_init, float).reshape(shape)
        else:
            b = cfg.b0 + cfg.noise * rng.uniform(-1.0, 1.0, shape)
        if cfg.a_init is None or cfg.b_init is None:
            a, b = clip_to_range(a, b, margin=max(cfg.chem.g_delta, 1e-12))
        return self.make_state(a, b)

    def make_state(self, a, b, time: float = 0.0, step: int = 0, u_warm=None) -> SimState:
        t = self.terms(a, b, u_warm)
        mu = self.chemical_potential(a, t)
        return SimState(a, b, t.u, mu, time, step, self.cfg.dt, t.energy, t.residual)

    def diagnostics(self, s: SimState, energy_change: float, rejections: int = 0, inner: int = 0, merit=None) -> Diagnostics:
        sp_ = s.a + s.b
        sm = s.a - s.b
        return Diagnostics(
            s.step,
            s.time,
            s.dt,
            s.energy,
            float(np.sum(s.a) * self.V),
            float(sp_.min()),
            float(sp_.max()),
            float(sm.min()),
            float(sm.max()),
            s.residual,
            energy_change,
            rejections,
            inner,
            energy_change if merit is None else merit,
        )

    def check_range(self, s: SimState) -> bool:
        """Warn once if ``a +- b`` leaves ``[-delta_r, 1 + delta_r]``."""
        r = self.cfg.range_delta
        ok = all(f.min() >= -r and f.max() <= 1.0 + r for f in (s.a + s.b, s.a - s.b))
        if not ok and not self._range_warned:
            self._range_warned = True
            warnings.warn(f"a+-b left the admissible range at step {s.step}", RuntimeWarning, stacklevel=2)
        return ok

    # spectral stepper
    def _trial_semi_implicit(self, s: SimState, t0: _Terms, dt: float):
        cfg = self.cfg
        lam, M = cfg.chem.lam, cfg.mobility
        k2 = self.k2
        if cfg.freeze_a:
            a_new = s.a.copy()
        else:
            Sa = cfg.stab_a
            ah = dct(s.a)
            muh = dct(t0.d_a)
            c = dt * lam * M * k2
            a_hat = (ah * (1.0 + c * Sa) - c * muh) / (1.0 + c * (Sa + cfg.c_grad * k2))
            a_hat.flat[0] = ah.flat[0]
            a_new = idct(a_hat)
        Sb = cfg.stab_b
        bh = dct(s.b)
        rh = dct(t0.d_b)
        b_hat = (bh * (1.0 + dt * M * Sb) - dt * M * rh) / (1.0 + dt * M * (Sb + lam * k2))
        b_new = idct(b_hat)
        return a_new, b_new

    def step_semi_implicit(self, s: SimState) -> tuple[SimState, Diagnostics]:
        cfg = self.cfg
        dt = s.dt if s.dt > 0 else cfg.dt
        F0 = s.energy
        slack = cfg.energy_slack * (1.0 + abs(F0))
        t0 = self.terms(s.a, s.b, s.u)
        for rej in range(cfg.max_halvings + 1):
            a_new, b_new = self._trial_semi_implicit(s, t0, dt)
            if np.all(np.isfinite(a_new)) and np.all(np.isfinite(b_new)):
                t = self.terms(a_new, b_new, s.u)
                if t.energy <= F0 + slack:
                    break
            dt *= 0.5
        else:
            raise StepFailure(f"energy increase persists after {cfg.max_halvings} step halvings at step {s.step}")
        mu = self.chemical_potential(a_new, t)
        next_dt = dt
        if cfg.dt_adaptive and rej == 0:
            next_dt = min(cfg.dt, 2.0 * dt)
        new = SimState(a_new, b_new, t.u, mu, s.time + dt, s.step + 1, next_dt, t.energy, t.residual)
        new_diag = self.diagnostics(new, t.energy - F0, rej)
        new_diag.dt = dt
        return new, new_diag

    # minimizing movement
    def penalised_energy(self, a, b, t: _Terms, a_old, b_old, dt) -> float:
        cfg = self.cfg
        lam, M = cfg.chem.lam, cfg.mobility
        pen = 0.0 if cfg.freeze_a else m_norm_sq(a - a_old, self.grid, lam * M) / (2.0 * dt)
        db = b - b_old
        return t.energy + pen + float(np.sum(db * db) * self.V) / (2.0 * dt * M)

    def step_minimizing_movement(self, s: SimState) -> tuple[SimState, Diagnostics]:
        """Descend ``F + |a - a_old|_{lam M}^2 / 2dt + |b - b_old|^2 / 2 dt M``.

        Preconditioned gradient steps in both fields (spectral
        preconditioners built from the quadratic parts), an exact elastic
        solve per trial and Armijo backtracking.  Iterates stop when the
        residual is below ``tol_mm`` or when round-off prevents further
        decrease.
        """
        cfg = self.cfg
        lam, M = cfg.chem.lam, cfg.mobility
        dt = s.dt if s.dt > 0 else cfg.dt
        a0, b0 = s.a, s.b
        a, b = a0.copy(), b0.copy()
        t = self.terms(a, b, s.u)
        phi = self.penalised_energy(a, b, t, a0, b0, dt)
        k2 = self.k2
        nz = k2 > 0
        it = 0
        res = np.inf
        while it < cfg.mm_max_iter:
            ra = self.chemical_potential(a, t) + green_apply(a - a0, self.grid, lam * M) / dt
            ra = ra - ra.mean()
            rb = self.b_force(b, t) + (b - b0) / (dt * M)
            res = max(0.0 if cfg.freeze_a else float(np.abs(ra).max()), float(np.abs(rb).max()))
            if res < cfg.tol_mm:
                break
            paa, _, pbb = psi_second(a, b, cfg.chem)
            Sa = max(0.0, float(np.median(paa)))
            Sb = max(0.0, float(np.median(pbb)))
            if cfg.freeze_a:
                pa = np.zeros_like(a)
            else:
                Pa = np.ones_like(k2)
                Pa[nz] = 1.0 / (dt * lam * M * k2[nz]) + lam * k2[nz] + Sa
                pah = -dct(ra) / Pa
                pah.flat[0] = 0.0
                pa = idct(pah)
            pb = idct(-dct(rb) / (1.0 / (dt * M) + lam * k2 + Sb))
            slope = float(np.sum(ra * pa + rb * pb) * self.V)
            if not slope < 0:
                break
            step = 1.0
            accepted = False
            for _ in range(30):
                a1, b1 = a + step * pa, b + step * pb
                t1 = self.terms(a1, b1, t.u)
                phi1 = self.penalised_energy(a1, b1, t1, a0, b0, dt)
                if phi1 <= phi + 1e-4 * step * slope:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                if it == 0 and res > 1e3 * cfg.tol_mm:
                    raise StepFailure(f"no descent of the penalised energy at step {s.step}")
                break
            a, b, t, phi = a1, b1, t1, phi1
            it += 1
        mu = self.chemical_potential(a, t)
        new = SimState(a, b, t.u, mu, s.time + dt, s.step + 1, dt, t.energy, t.residual)
        # merit: penalised energy at the new state minus the old energy
        return new, self.diagnostics(new, t.energy - s.energy, 0, it, merit=phi - s.energy)

    def step(self, s: SimState):
        if self.cfg.stepper == "semi_implicit":
            return self.step_semi_implicit(s)
        return self.step_minimizing_movement(s)

    def run(self, state: SimState | None = None, callback=None):
        """Advance until ``t_end`` or ``n_steps``.

        ``callback(state, diag)`` is called for the initial state (with
        ``diag.step == 0``) and after every accepted step.  Returns the final
        state and the list of diagnostics rows.
        """
        cfg = self.cfg
        if cfg.t_end is None and cfg.n_steps is None:
            raise ValueError("set t_end or n_steps")
        s = self.initial_state() if state is None else state
        rows = [self.diagnostics(s, 0.0)]
        if callback is not None:
            callback(s, rows[0])
        taken = 0
        while True:
            if cfg.n_steps is not None and taken >= cfg.n_steps:
                break
            if cfg.t_end is not None:
                remaining = cfg.t_end - s.time
                if remaining <= 1e-12 * max(1.0, cfg.t_end):
                    break
                if s.dt > remaining:
                    s = replace(s, dt=remaining)
            s, diag = self.step(s)
            taken += 1
            self.check_range(s)
            rows.append(diag)
            if callback is not None:
                callback(s, diag)
        return s, rows


def clip_to_range(a, b, margin: float = 1e-6):
    """Project so that ``a + b`` and ``a - b`` lie in ``[margin, 1 - margin]``."""
    a = np.clip(a, margin, 1.0 - margin)
    lim = np.minimum(a - margin, 1.0 - margin - a)
    b = np.clip(b, -lim, lim)
    return a, b


def _sim(config: SimConfig) -> Simulation:
    sim = config.__dict__.get("_simulation")
    if sim is None:
        sim = Simulation(config)
        config.__dict__["_simulation"] = sim
    return sim


def elastic_equilibrium(d, config: SimConfig, u_warm=None):
    """Displacement at equilibrium for the fraction field ``d``."""
    sim = _sim(config)
    return sim.elastic.solve(np.asarray(d, float), u_warm, tol=sim.tol_elast)


def total_free_energy(state: SimState, config: SimConfig) -> float:
    """Total energy of ``(a, b)`` with the displacement re-equilibrated."""
    return _sim(config).terms(state.a, state.b, state.u).energy


def energy_at(a, b, u, config: SimConfig) -> float:
    """Total energy for the given displacement (no elastic solve)."""
    sim = _sim(config)
    g = sim.grid
    E_el, _, _ = sim.elastic.energy_terms(a + b, u)
    pv, _, _ = psi(a, b, config.chem)
    return float(np.sum(pv) * sim.V) + config.chem.lam * (gradient_energy(a, g) + gradient_energy(b, g)) + E_el


def step_semi_implicit(state: SimState, config: SimConfig) -> SimState:
    return _sim(config).step_semi_implicit(state)[0]


def step_minimizing_movement(state: SimState, config: SimConfig) -> SimState:
    return _sim(config).step_minimizing_movement(state)[0]


def flux_field(state: SimState, config: SimConfig):
    """Face fluxes ``J = -M grad mu``; the conserved update is ``-lam div J``."""
    return _flux_field(state.mu, config.grid, config.mobility)
