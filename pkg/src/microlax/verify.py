"""Pinned property suites comparing closed forms with independent oracles.

Every suite draws its instances from a fixed seed, runs the comparison and
returns :class:`Check` rows (metric, tolerance, pass flag).  Tolerances may
be overridden by key, which is how a deliberately impossible tolerance is
used to exercise the failure path.

Suites
------
oracle1d     1D formula against the strain scan
laminate     2D formula against rank-1/rank-2 laminate searches
cell         2D formula against discrete cell problems at two resolutions
fd           analytic derivatives against central differences
assumption   sampled monotonicity and growth constants
regimes      closed-form regime instances
reduction    anti-plane formula against the embedded beta = 0 2D path
extension    C1 seams and linear growth of the continued energy
dynamics     1D spinodal run: mass, energy and elastic residual audits
mm           minimizing-movement descent and agreement with the spectral stepper
determinism  repeated deterministic simulations are byte-identical
"""

from __future__ import annotations

import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MicrolaxError
from .oracle import (
    CellProblem,
    cell_problem_min,
    fd_check,
    laminate_search_2d,
    regime_margin,
    scan_1d,
    stripe_layout,
)
from .phase_energy import ChemParams, LinearTheoryParams, PhaseParams
from .relaxed_energy import (
    RegimeLabel,
    assumption_A_probe,
    classify_regime,
    eval_1d,
    eval_2d,
    eval_extended,
    eval_fixed_beta,
    eval_scalar3d,
    gamma_star,
)
from .tensor_core import SQRT2, cubic_mandel

SEEDS = {
    "oracle1d": 101,
    "laminate": 202,
    "laminate3": 203,
    "cell": 303,
    "fd": 404,
    "assumption": 505,
    "reduction": 707,
    "extension": 1010,
    "dynamics": 808,
}


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    HEADER = ("suite", "check", "value", "tolerance", "passed", "detail", "seconds")

    def row(self):
        return [self.suite, self.name, self.value, self.tol, int(self.passed), self.detail, self.seconds]


class Tolerances:
    """Default tolerances with optional overrides keyed ``suite.check``.

    Keys are matched case-insensitively since INI option names are folded
    to lower case.
    """

    def __init__(self, overrides: dict | None = None):
        self.overrides = {k.lower(): v for k, v in (overrides or {}).items()}

    def get(self, suite: str, name: str, default: float) -> float:
        return float(self.overrides.get(f"{suite}.{name}".lower(), default))


def _le(suite, name, value, tol, detail="", seconds=0.0):
    return Check(suite, name, float(value), float(tol), bool(value <= tol), detail, seconds)


def _ge(suite, name, value, tol, detail="", seconds=0.0):
    return Check(suite, name, float(value), float(tol), bool(value >= tol), detail, seconds)


# ---------------------------------------------------------------------------
# instance families


def random_cubic(rng, c11=(1.5, 4.0), c44=(0.5, 2.0), ratio=(0.0, 0.8)) -> np.ndarray:
    """Cubic Mandel modulus with ``C11 > C12 >= 0`` (positive definite)."""
    a = rng.uniform(*c11)
    return cubic_mandel(a, rng.uniform(*ratio) * a, rng.uniform(*c44))


def random_spd(rng, n: int, lo: float = 0.5, hi: float = 3.0) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q @ np.diag(rng.uniform(lo, hi, n)) @ q.T


def instances_1d(n: int, seed: int):
    """Bar instances: moduli and offsets in [0.1, 10], strains in [-5, 5]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a1, a2, w1, w2 = rng.uniform(0.1, 10.0, 4)
        t1, t2, eps = rng.uniform(-5.0, 5.0, 3)
        d = rng.uniform(0.0, 1.0)
        out.append((d, eps, PhaseParams(a1, a2, t1, t2, w1=w1, w2=w2)))
    return out


def instances_2d(n: int, seed: int, regime: int):
    """Random commuting (cubic) instances in the requested regime."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a1, a2 = random_cubic(rng), random_cubic(rng)
        if regime == 3:
            s = rng.uniform(0.05, 0.1)
            t1 = np.zeros(3)
            t2 = np.array([s, s, 0.0]) + rng.uniform(-0.01, 0.01, 3)
        else:
            t1, t2 = rng.uniform(-0.1, 0.1, 3), rng.uniform(-0.1, 0.1, 3)
        d = rng.uniform(0.05, 0.95)
        e = d * t1 + (1 - d) * t2 + rng.uniform(-0.05, 0.05, 3)
        p = PhaseParams(a1, a2, t1, t2)
        label, _ = classify_regime(d, e, p)
        if int(label) == regime:
            out.append((d, e, p))
    return out


def instances_cell(n: int, seed: int):
    """Regime I family: equal cubic moduli, jump ``[[x, y], [y, 0]]``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a = random_cubic(rng)
        x, y = rng.uniform(-0.3, 0.3, 2)
        t1 = rng.uniform(-0.1, 0.1, 3)
        t2 = t1 + np.array([x, 0.0, SQRT2 * y])
        e = rng.uniform(-0.3, 0.3, 3)
        d = rng.uniform(0.2, 0.8)
        out.append((d, e, PhaseParams(a, a, t1, t2)))
    return out


def instances_scalar3d(n: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = PhaseParams(random_spd(rng, 2), random_spd(rng, 2), rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2),
                        w1=rng.uniform(0, 1), w2=rng.uniform(0, 1))
        out.append((rng.uniform(0.0, 1.0), rng.uniform(-1.0, 1.0, 2), p))
    return out


def closed_form_regime_instances():
    """Unit moduli with eigenstrain jumps diag(1,-1), diag(2,1) and Id."""
    eye = np.eye(3)
    z = np.zeros(3)
    return {
        "diag(1,-1)": (PhaseParams(eye, eye, z, [1.0, -1.0, 0.0]), RegimeLabel.One, 0.0),
        "diag(2,1)": (PhaseParams(eye, eye, z, [2.0, 1.0, 0.0]), RegimeLabel.Two, 0.5),
        "Id": (PhaseParams(eye, eye, z, [1.0, 1.0, 0.0]), RegimeLabel.Three, 1.0),
    }


# ---------------------------------------------------------------------------
# suites


def suite_oracle1d(tol: Tolerances, n: int = 1000):
    t0 = time.perf_counter()
    worst = 0.0
    worst_scaled = 0.0
    below = 0.0
    for d, eps, p in instances_1d(n, SEEDS["oracle1d"]):
        v = eval_1d(d, eps, p).value
        s = scan_1d(d, eps, p)
        worst = max(worst, abs(v - s) / abs(s))
        worst_scaled = max(worst_scaled, abs(v - s) / (1.0 + abs(v)))
        below = max(below, (v - s) / (1.0 + abs(v)))
    sec = time.perf_counter() - t0
    S = "oracle1d"
    return [
        _le(S, "max_rel_gap", worst, tol.get(S, "max_rel_gap", 1e-6), f"{n} instances", sec),
        _le(S, "max_gap_over_1_plus_value", worst_scaled, tol.get(S, "max_gap_over_1_plus_value", 1e-6)),
        _le(S, "scan_below_formula", below, tol.get(S, "scan_below_formula", 1e-9), "scan is an upper bound"),
        _le(S, "runtime_s", sec, tol.get(S, "runtime_s", 10.0)),
    ]


def suite_laminate(tol: Tolerances, n12: int = 100, n3: int = 20):
    S = "laminate"
    t0 = time.perf_counter()
    worst = {1: 0.0, 2: 0.0}
    below = 0.0
    insts = instances_2d(n12 // 2, SEEDS["laminate"], 1) + instances_2d(n12 - n12 // 2, SEEDS["laminate"] + 1, 2)
    for d, e, p in insts:
        r = eval_2d(d, e, p)
        en, _ = laminate_search_2d(d, e, p, n_angles=720, n_fractions=200, rank2=False)
        worst[int(r.regime)] = max(worst[int(r.regime)], abs(en - r.value) / abs(r.value))
        below = max(below, (r.value - en) / (1.0 + abs(r.value)))
    worst3 = 0.0
    min_gap1 = np.inf
    for d, e, p in instances_2d(n3, SEEDS["laminate3"], 3):
        r = eval_2d(d, e, p)
        en, cand = laminate_search_2d(d, e, p, n_angles=720, n_fractions=200, rank2=True)
        worst3 = max(worst3, abs(cand.extra["rank2"] - r.value) / abs(r.value))
        below = max(below, (r.value - en) / (1.0 + abs(r.value)))
        min_gap1 = min(min_gap1, (cand.extra["rank1"] - r.value) / abs(r.value))
    sec = time.perf_counter() - t0
    return [
        _le(S, "regime1_max_rel_gap", worst[1], tol.get(S, "regime1_max_rel_gap", 1e-3), f"{n12 // 2} instances, 720 angles"),
        _le(S, "regime2_max_rel_gap", worst[2], tol.get(S, "regime2_max_rel_gap", 1e-3), f"{n12 - n12 // 2} instances, 720 angles"),
        _le(S, "regime3_rank2_max_rel_gap", worst3, tol.get(S, "regime3_rank2_max_rel_gap", 1e-2), f"{n3} instances"),
        _ge(S, "regime3_rank1_min_rel_excess", min_gap1, tol.get(S, "regime3_rank1_min_rel_excess", 0.0), "rank-1 strictly worse"),
        _le(S, "search_below_formula", below, tol.get(S, "search_below_formula", 1e-9), "searches are upper bounds"),
        _le(S, "runtime_s", sec, tol.get(S, "runtime_s", 300.0), "", sec),
    ]


def suite_cell(tol: Tolerances, n_inst: int = 10, sizes=(32, 48), anneal_steps: int = 50):
    S = "cell"
    t0 = time.perf_counter()
    gaps = {n: [] for n in sizes}
    below = 0.0
    for d, e, p in instances_cell(n_inst, SEEDS["cell"]):
        for n in sizes:
            cp = CellProblem(n, stripe_layout(n, d, 0.0), e)
            # compare at the attained fraction round(d n^2) / n^2
            dn = cp.fraction
            vn = eval_2d(dn, e, p).value
            en = cell_problem_min(cp, p, anneal_steps=anneal_steps)
            gaps[n].append((en - vn) / abs(vn))
            below = max(below, (vn - en) / (1.0 + abs(vn)))
    g0, g1 = np.array(gaps[sizes[0]]), np.array(gaps[sizes[1]])
    sec = time.perf_counter() - t0
    shrink = float(np.max(g1 - g0))
    return [
        _le(S, f"max_rel_gap_n{sizes[0]}", g0.max(), tol.get(S, f"max_rel_gap_n{sizes[0]}", 0.05), f"{n_inst} Regime I instances"),
        _le(S, "gap_growth_on_refinement", shrink, tol.get(S, "gap_growth_on_refinement", 0.0),
            f"max gap n{sizes[1]} minus gap n{sizes[0]} (negative = shrinks)"),
        _le(S, "cell_below_formula", below, tol.get(S, "cell_below_formula", 1e-9), "cell problems are upper bounds"),
        Check(S, "runtime_s", sec, np.inf, True, "", sec),
    ]


def fd_points(seed: int):
    """500 screened points: (category, evaluator, d, eps)."""
    rng = np.random.default_rng(seed)
    pts = []
    for d, eps, p in instances_1d(100, seed):
        d = 0.02 + 0.96 * d
        pts.append(("1d", lambda dd, ee, p=p: eval_1d(dd, float(ee[0]), p), d, np.array([eps])))
    for _ in range(20):
        a = random_cubic(rng)
        t = rng.uniform(-0.1, 0.1, 3)
        p = PhaseParams(a, a, t, t, w1=rng.uniform(0, 1), w2=rng.uniform(0, 1))
        pts.append(("2d_regime0", lambda dd, ee, p=p: eval_2d(dd, ee, p), rng.uniform(0.05, 0.95), rng.uniform(-0.1, 0.1, 3)))
    for regime, count in ((1, 100), (2, 100), (3, 80)):
        got = 0
        for d, e, p in instances_2d(10 * count, seed + regime, regime):
            if got == count:
                break
            if regime_margin(d, e, p) <= 1e-8:
                continue
            pts.append((f"2d_regime{regime}", lambda dd, ee, p=p: eval_2d(dd, ee, p), d, e))
            got += 1
    for d, f, p in instances_scalar3d(100, seed + 7):
        pts.append(("scalar3d", lambda dd, ee, p=p: eval_scalar3d(dd, ee, p), 0.02 + 0.96 * d, f))
    return pts


def suite_fd(tol: Tolerances):
    S = "fd"
    t0 = time.perf_counter()
    worst = {}
    count = {}
    for cat, fn, d, e in fd_points(SEEDS["fd"]):
        err = fd_check(fn, (d, e))
        worst[cat] = max(worst.get(cat, 0.0), err)
        count[cat] = count.get(cat, 0) + 1
    sec = time.perf_counter() - t0
    out = []
    for cat in sorted(worst):
        default = 1e-5 if cat == "2d_regime2" else 1e-6
        out.append(_le(S, f"{cat}_max_rel_err", worst[cat], tol.get(S, f"{cat}_max_rel_err", default), f"{count[cat]} points"))
    out.append(_ge(S, "points", sum(count.values()), tol.get(S, "points", 500), "", sec))
    return out


def suite_assumption(tol: Tolerances, n: int = 10_000):
    S = "assumption"
    rng = np.random.default_rng(SEEDS["assumption"])
    C = random_spd(rng, 3)
    models = {
        "w_lin": LinearTheoryParams(C, rng.uniform(-0.1, 0.1, 3), C2=random_spd(rng, 3)),
        "eval_1d": PhaseParams(rng.uniform(0.1, 10), rng.uniform(0.1, 10), rng.uniform(-1, 1), rng.uniform(-1, 1)),
        "eval_2d": PhaseParams(random_cubic(rng), random_cubic(rng), rng.uniform(-0.1, 0.1, 3), rng.uniform(-0.1, 0.1, 3)),
        "eval_scalar3d": PhaseParams(random_spd(rng, 2), random_spd(rng, 2), rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2)),
    }
    out = []
    for k, (name, p) in enumerate(models.items()):
        rep = assumption_A_probe(p, n_samples=n, seed=SEEDS["assumption"] + k)
        out.append(Check(S, f"{name}_c1", rep.c1_hat, 0.0, rep.c1_hat > tol.get(S, f"{name}_c1", 0.0), "must be > 0"))
        out.append(Check(S, f"{name}_C1", rep.C1_hat, np.inf, bool(np.isfinite(rep.C1_hat)), "must be finite"))
    rep = assumption_A_probe(PhaseParams(1.0, 2.0, 0.0, 1.0), n_samples=n, seed=SEEDS["assumption"])
    out.append(_ge(S, "bar_alpha_1_2_c1", rep.c1_hat, tol.get(S, "bar_alpha_1_2_c1", 1.0 - 1e-9), "minimum coefficient is 1"))
    return out


def suite_regimes(tol: Tolerances):
    S = "regimes"
    out = []
    for name, (p, want, beta) in closed_form_regime_instances().items():
        label, b = classify_regime(0.5, np.zeros(3), p)
        out.append(Check(S, f"{name}_label", float(label), float(want), label == want, label.name))
        out.append(_le(S, f"{name}_beta_err", abs(b - beta), tol.get(S, f"{name}_beta_err", 1e-10)))
    eye = np.eye(3)
    gs = gamma_star(PhaseParams(eye, eye, np.zeros(3), np.zeros(3))).value
    out.append(_le(S, "gamma_star_identity_err", abs(gs - 1.0), tol.get(S, "gamma_star_identity_err", 1e-12)))
    return out


def _embed(p: PhaseParams) -> PhaseParams:
    def blk(a):
        m = np.eye(3)
        m[:2, :2] = a
        return m

    return PhaseParams(blk(p.alpha1), blk(p.alpha2), np.r_[p.epsT1, 0.0], np.r_[p.epsT2, 0.0], w1=p.w1, w2=p.w2)


def suite_reduction(tol: Tolerances, n: int = 1000):
    S = "reduction"
    worst = 0.0
    for d, f, p in instances_scalar3d(n, SEEDS["reduction"]):
        a = eval_scalar3d(d, f, p)
        b = eval_fixed_beta(d, np.r_[f, 0.0], _embed(p), beta=0.0)
        scale = 1.0 + abs(a.value) + abs(a.d_d) + np.abs(a.d_eps).max()
        err = max(abs(a.value - b.value), abs(a.d_d - b.d_d), np.abs(a.d_eps - b.d_eps[:2]).max(), abs(b.d_eps[2]))
        worst = max(worst, err / scale)
    return [_le(S, "max_rel_diff", worst, tol.get(S, "max_rel_diff", 1e-12), f"{n} instances")]


def _one_sided(fn, x, h, side):
    if side > 0:
        return (-3 * fn(x) + 4 * fn(x + h) - fn(x + 2 * h)) / (2 * h)
    return (3 * fn(x) - 4 * fn(x - h) + fn(x - 2 * h)) / (2 * h)


def suite_extension(tol: Tolerances):
    S = "extension"
    rng = np.random.default_rng(SEEDS["extension"])
    cases = []
    for d, eps, p in instances_1d(5, SEEDS["extension"]):
        cases.append(("1d", eps, p))
    for regime in (1, 2, 3):
        for d, e, p in instances_2d(3, SEEDS["extension"] + regime, regime):
            cases.append((f"2d_regime{regime}", e, p))
    for d, f, p in instances_scalar3d(3, SEEDS["extension"] + 9):
        cases.append(("scalar3d", f, p))
    cases.append(("linear", rng.uniform(-0.1, 0.1, 3), LinearTheoryParams(random_spd(rng, 3), rng.uniform(-0.1, 0.1, 3))))
    seam = 0.0
    slope = 0.0
    growth = 0.0
    h = 1e-5  # same default step as fd_check
    for _, e, p in cases:
        def val(x, e=e, p=p):
            return eval_extended(x, e, p).value

        for x in (-1.0, 0.0, 1.0, 2.0):
            left, right = _one_sided(val, x, h, -1), _one_sided(val, x, h, +1)
            an = eval_extended(x, e, p).d_d
            sc = max(1.0, abs(an))
            seam = max(seam, abs(left - right) / sc)
            slope = max(slope, max(abs(left - an), abs(right - an)) / sc)
        if isinstance(p, LinearTheoryParams):
            continue
        v0, v1 = eval_extended(0.0, e, p).value, eval_extended(1.0, e, p).value
        growth = max(growth, abs(eval_extended(-2.0, e, p).value - (v0 + 3.0)) / (1 + abs(v0)))
        growth = max(growth, abs(eval_extended(3.0, e, p).value - (v1 + 2.0)) / (1 + abs(v1)))
    return [
        _le(S, "seam_one_sided_fd_mismatch", seam, tol.get(S, "seam_one_sided_fd_mismatch", 1e-6), f"{len(cases)} energies, seams -1, 0, 1, 2"),
        _le(S, "seam_fd_vs_analytic", slope, tol.get(S, "seam_fd_vs_analytic", 1e-6)),
        _le(S, "linear_growth_err", growth, tol.get(S, "linear_growth_err", 4 * np.finfo(float).eps), "d = -2 and d = 3"),
    ]


def spinodal_config(n_steps: int = 10_000):
    """1D spinodal decomposition with the relaxed bar energy."""
    from .field_solver import Grid, SimConfig

    p = PhaseParams(1.0, 2.0, 0.0, 0.1, sigma_ext=0.01)
    chem = ChemParams(theta=0.5, kappa1=2.0, kappa2=0.1, lam=1e-3)
    return SimConfig(params=p, grid=Grid((256,), (1.0,)), chem=chem, dt=1e-4, dt_adaptive=True,
                     n_steps=n_steps, a0=0.5, b0=0.0, noise=1e-3, seed=SEEDS["dynamics"])


def suite_dynamics(tol: Tolerances, n_steps: int = 10_000):
    from .field_solver import Simulation

    S = "dynamics"
    t0 = time.perf_counter()
    sim = Simulation(spinodal_config(n_steps))
    _, rows = sim.run()
    sec = time.perf_counter() - t0
    mass = np.array([r.mass for r in rows])
    F = np.array([r.energy for r in rows])
    inc = np.max((F[1:] - F[:-1]) / (1.0 + np.abs(F[:-1])))
    return [
        _ge(S, "accepted_steps", len(rows) - 1, n_steps),
        _le(S, "mass_drift_rel", np.max(np.abs(mass - mass[0])) / abs(mass[0]), tol.get(S, "mass_drift_rel", 1e-9)),
        _le(S, "max_energy_increase_rel", inc, tol.get(S, "max_energy_increase_rel", 1e-9)),
        _le(S, "max_elastic_residual", max(r.residual for r in rows), tol.get(S, "max_elastic_residual", 1e-9)),
        _le(S, "runtime_s", sec, tol.get(S, "runtime_s", 60.0), "single thread", sec),
    ]


def smooth_1d_setup():
    from .field_solver import Grid

    g = Grid((64,), (1.0,))
    x = g.centers()[0]
    a0 = 0.5 + 0.05 * np.cos(2 * np.pi * x)
    b0 = 0.02 * np.cos(np.pi * x)
    p = PhaseParams(1.0, 2.0, 0.0, 0.1)
    chem = ChemParams(theta=0.5, kappa1=2.0, kappa2=0.1, lam=1e-2)
    return g, p, chem, a0, b0


def suite_mm(tol: Tolerances, t_end: float = 1e-2, dts=(2e-3, 1e-3, 5e-4)):
    from .field_solver import SimConfig, Simulation

    S = "mm"
    g, p, chem, a0, b0 = smooth_1d_setup()
    errs = []
    worst_merit = -np.inf
    for dt in dts:
        finals = {}
        for st in ("semi_implicit", "minimizing_movement"):
            cfg = SimConfig(params=p, grid=g, chem=chem, dt=dt, t_end=t_end, a_init=a0, b_init=b0, stepper=st, dt_adaptive=False)
            s, rows = Simulation(cfg).run()
            finals[st] = s
            if st == "minimizing_movement":
                worst_merit = max(worst_merit, max(r.merit_change for r in rows[1:]))
        diff = np.concatenate([finals["semi_implicit"].a - finals["minimizing_movement"].a,
                               finals["semi_implicit"].b - finals["minimizing_movement"].b])
        errs.append(float(np.sqrt(np.sum(diff * diff) * g.cell_volume)))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    return [
        _le(S, "max_penalised_energy_change", worst_merit, tol.get(S, "max_penalised_energy_change", 0.0), "every step"),
        _ge(S, "min_observed_order", min(orders), tol.get(S, "min_observed_order", 0.9),
            "L2 distance to the spectral stepper: " + ", ".join(f"{e:.3e}" for e in errs)),
    ]


DETERMINISM_CONFIG = """\
[run]
variant = relaxed
n_steps = 40
dt = 1e-4
snapshot_every = 20
vtk = true

[grid]
dim = 2
n = 16

[chem]
theta = 0.5
kappa1 = 2.0
kappa2 = 0.1
lam = 1e-3

[phase1]
cubic = 3.0, 1.0, 1.2
eigenstrain = 0, 0, 0

[phase2]
cubic = 4.0, 1.5, 1.0
eigenstrain = 0.02, 0.01, 0

[load]
sigma_ext = 0.001, 0, 0

[initial]
noise = 0.05
seed = 7
"""


def suite_determinism(tol: Tolerances):
    from .cli import run_simulation

    S = "determinism"
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "det.ini"
        cfg.write_text(DETERMINISM_CONFIG, encoding="utf-8")
        outs = []
        for k in range(2):
            out = Path(tmp) / f"run{k}"
            run_simulation(cfg, out, deterministic=True)
            outs.append(out)
        files = sorted(p.name for p in outs[0].iterdir() if p.suffix in (".csv", ".vtk"))
        other = sorted(p.name for p in outs[1].iterdir() if p.suffix in (".csv", ".vtk"))
        same = files == other and all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in files)
    return [Check(S, "byte_identical_outputs", float(same), 1.0, bool(same), f"{len(files)} files compared")]


SUITES = {
    "regimes": suite_regimes,
    "reduction": suite_reduction,
    "extension": suite_extension,
    "fd": suite_fd,
    "oracle1d": suite_oracle1d,
    "assumption": suite_assumption,
    "laminate": suite_laminate,
    "cell": suite_cell,
    "mm": suite_mm,
    "dynamics": suite_dynamics,
    "determinism": suite_determinism,
}


def run_suites(names=None, overrides: dict | None = None):
    """Run the named suites (all by default); errors become failed checks."""
    tol = Tolerances(overrides)
    names = list(SUITES) if names is None else list(names)
    out = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        t0 = time.perf_counter()
        try:
            checks = SUITES[name](tol)
        except MicrolaxError as exc:
            checks = [Check(name, "error", np.nan, np.nan, False, f"{type(exc).__name__}: {exc}")]
        sec = time.perf_counter() - t0
        for c in checks:
            if not c.seconds:
                c.seconds = sec
        out.extend(checks)
    return out
