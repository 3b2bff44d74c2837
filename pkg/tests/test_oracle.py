import numpy as np
import pytest

from microlax.oracle import (
    CellProblem,
    cell_problem_min,
    fd_check,
    laminate_search_2d,
    q1_strain_operator,
    rank1_candidate,
    regime_margin,
    scan_1d,
    stripe_layout,
)
from microlax.phase_energy import LinearTheoryParams, PhaseParams, w_lin, w_micro
from microlax.relaxed_energy import RegimeLabel, eval_1d, eval_2d
from microlax.tensor_core import cubic_mandel
from microlax.verify import instances_1d, instances_2d

EYE = np.eye(3)
Z = np.zeros(3)


def test_scan_worked_instance_and_endpoint():
    p = PhaseParams(1.0, 2.0, 0.0, 1.0)
    assert abs(scan_1d(0.5, 0.5, p)) <= 1e-9
    q = PhaseParams(1.3, 0.4, 0.2, -0.7, w1=0.1, w2=0.6)
    assert scan_1d(0.0, 0.3, q) == w_micro(2, 0.3, q)


def test_scan_matches_formula_on_random_instances():
    for d, eps, p in instances_1d(50, 9):
        v = eval_1d(d, eps, p).value
        s = scan_1d(d, eps, p)
        assert abs(s - v) <= 1e-6 * (1 + abs(v))
        assert s >= v - 1e-9 * (1 + abs(v))


def test_scan_argument_checks():
    p = PhaseParams(1.0, 2.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        scan_1d(1.0, 0.0, p)
    with pytest.raises(ValueError):
        scan_1d(0.5, 0.0, p, n_grid=10)


def test_rank1_candidate_is_admissible():
    p = PhaseParams(cubic_mandel(3, 1, 1), cubic_mandel(4, 1.5, 0.8), Z, [0.05, -0.02, 0.01])
    d, e = 0.4, np.array([0.01, 0.0, 0.02])
    c = rank1_candidate(0.3, d, e, p)
    s1, s2 = c.leaf_strains
    np.testing.assert_allclose(d * s1 + (1 - d) * s2, e, atol=1e-15)
    # the strain jump is rank one: a symmetrised a (x) n
    jump = np.array([[s1[0] - s2[0], (s1[2] - s2[2]) / np.sqrt(2)], [(s1[2] - s2[2]) / np.sqrt(2), s1[1] - s2[1]]])
    assert np.linalg.det(jump) <= 1e-15
    n = np.array([np.cos(0.3), np.sin(0.3)])
    sig = [p.alpha1 @ (s1 - p.epsT1), p.alpha2 @ (s2 - p.epsT2)]
    tr = [np.array([[s[0], s[2] / np.sqrt(2)], [s[2] / np.sqrt(2), s[1]]]) @ n for s in sig]
    np.testing.assert_allclose(tr[0], tr[1], atol=1e-14)


def test_laminate_regime_one_matches_formula():
    for d, e, p in instances_2d(3, 11, 1):
        en, best = laminate_search_2d(d, e, p, n_angles=720, rank2=False)
        v = eval_2d(d, e, p).value
        assert en == pytest.approx(v, rel=1e-6)
        assert best.rank == 1


def test_laminate_regime_three_identity_jump():
    p = PhaseParams(EYE, EYE, Z, [1.0, 1.0, 0.0])
    r = eval_2d(0.5, Z, p)
    assert r.regime == RegimeLabel.Three
    assert r.extra["pseudo_inverse"]
    en, best = laminate_search_2d(0.5, Z, p, n_angles=720, n_fractions=200)
    assert best.extra["rank2"] == pytest.approx(r.value, rel=1e-3)
    # with equal unit moduli a rank-1 laminate is already optimal
    assert best.extra["rank1"] == pytest.approx(r.value, rel=1e-9)
    np.testing.assert_allclose(sum(w * s for w, s in zip(best.leaf_weights, best.leaf_strains)), Z, atol=1e-12)


def test_laminate_regime_three_needs_rank_two():
    for d, e, p in instances_2d(3, 31, 3):
        r = eval_2d(d, e, p)
        en, best = laminate_search_2d(d, e, p, n_angles=720, n_fractions=200)
        assert best.extra["rank2"] == pytest.approx(r.value, rel=1e-2)
        assert best.extra["rank1"] > r.value
        assert best.rank == 2


def test_laminate_endpoint():
    p = PhaseParams(cubic_mandel(3, 1, 1), cubic_mandel(4, 1.5, 0.8), Z, [0.05, -0.02, 0.01], w1=0.3)
    e = np.array([0.02, 0.01, -0.03])
    en, _ = laminate_search_2d(1.0, e, p)
    assert en == w_micro(1, e, p)


def test_regime_margin_positive_inside():
    for reg in (1, 2, 3):
        for d, e, p in instances_2d(2, 20 + reg, reg):
            assert regime_margin(d, e, p) > 0
    assert regime_margin(0.5, Z, PhaseParams(EYE, EYE, Z, Z)) == np.inf


def test_q1_strain_operator_exact_for_affine_fields():
    nx, ny, hx, hy = 5, 4, 0.2, 0.25
    B = q1_strain_operator(nx, ny, hx, hy)
    G = np.array([[0.3, -0.1], [0.4, 0.2]])
    yy, xx = np.meshgrid(np.arange(ny + 1) * hy, np.arange(nx + 1) * hx, indexing="ij")
    X = np.stack([xx.ravel(), yy.ravel()], 1)
    u = (X @ G.T).ravel()
    eps = (B @ u).reshape(-1, 3)
    S = 0.5 * (G + G.T)
    want = np.array([S[0, 0], S[1, 1], np.sqrt(2) * S[0, 1]])
    np.testing.assert_allclose(eps, np.broadcast_to(want, eps.shape), atol=1e-14)


@pytest.mark.parametrize("theta", [0.0, 0.4, np.pi / 4])
def test_stripe_layout_fraction(theta):
    for d in (0.0, 0.23, 0.5, 0.81, 1.0):
        lay = stripe_layout(16, d, theta)
        assert lay.sum() == round(d * 256)


def test_cell_single_phase():
    p = PhaseParams(cubic_mandel(3, 1, 1), cubic_mandel(4, 1.5, 0.8), [0.01, 0.02, 0.0], Z, w1=0.25)
    cp = CellProblem(8, np.ones((8, 8)), p.epsT1)
    assert cell_problem_min(cp, p, anneal_steps=0) == pytest.approx(0.25, abs=1e-10)


def test_cell_homogeneous_data_independent_of_layout():
    a = cubic_mandel(3, 1, 1)
    t = np.array([0.02, -0.01, 0.01])
    p = PhaseParams(a, a, t, t, w1=0.1, w2=0.4)
    e = np.array([0.05, 0.01, -0.02])
    rng = np.random.default_rng(1)
    n = 8
    for _ in range(3):
        lay = np.zeros(n * n, int)
        lay[rng.permutation(n * n)[:24]] = 1
        cp = CellProblem(n, lay.reshape(n, n), e)
        v = eval_2d(cp.fraction, e, p).value
        assert cell_problem_min(cp, p, anneal_steps=0) == pytest.approx(v, abs=1e-8)


def test_cell_is_an_upper_bound_in_regime_one():
    a = cubic_mandel(3, 1, 1)
    p = PhaseParams(a, a, Z, [0.1, 0.0, 0.05])
    e = np.array([0.01, 0.02, 0.0])
    cp = CellProblem(16, stripe_layout(16, 0.5), e)
    en = cell_problem_min(cp, p, anneal_steps=10)
    v = eval_2d(cp.fraction, e, p).value
    assert v - 1e-12 <= en <= 1.1 * v


def test_fd_check_examples():
    rng = np.random.default_rng(2)
    q = LinearTheoryParams(EYE + 0.1, rng.normal(size=3) * 0.1)
    assert fd_check(lambda d, e: w_lin(d, e, q), (0.3, rng.normal(size=3))) <= 1e-9
    for d, eps, p in instances_1d(10, 4):
        assert fd_check(lambda dd, ee, p=p: eval_1d(dd, float(ee[0]), p), (0.02 + 0.96 * d, [eps])) <= 1e-6
    p2 = PhaseParams(EYE, EYE, Z, [2.0, 1.0, 0.0])
    assert fd_check(lambda dd, ee: eval_2d(dd, ee, p2), (0.5, Z)) <= 1e-5


def test_fd_check_detects_wrong_derivative():
    bad = lambda d, e: (d * d, 0.0, np.zeros(1))  # noqa: E731
    assert fd_check(bad, (1.0, [0.0])) > 0.5
