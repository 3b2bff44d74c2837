"""The compiled and numpy kernel backends must agree."""

import numpy as np
import pytest

from microlax import kernels
from microlax.relaxed_energy import RegimeLabel, eval_2d, eval_scalar3d, gamma_star
from microlax.verify import instances_2d, instances_scalar3d

BACKENDS = kernels.backends()


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS


def _batch(insts):
    d = np.array([x[0] for x in insts])
    e = np.array([x[1] for x in insts])
    return d, e


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("regime", [1, 2, 3])
def test_relaxed_batch_matches_point_evaluator(name, regime):
    impl = BACKENDS[name]
    insts = instances_2d(8, 40 + regime, regime)
    # same phase data across the batch: reuse the first instance's parameters
    p = insts[0][2]
    d, e = _batch(insts)
    out = impl.relaxed_batch(d, e, p.alpha1, p.alpha2, p.epsT1, p.epsT2, p.w1, p.w2, gamma_star(p).value)
    value, d_d, d_eps, hess, mixed, reg, beta, status = out
    assert not np.any(status)
    for k in range(d.size):
        r = eval_2d(d[k], e[k], p)
        assert value[k] == pytest.approx(r.value, rel=1e-11, abs=1e-15)
        assert d_d[k] == pytest.approx(r.d_d, rel=1e-9, abs=1e-12)
        np.testing.assert_allclose(d_eps[k], r.d_eps, rtol=1e-9, atol=1e-12)
        assert reg[k] == int(r.regime)
        assert beta[k] == pytest.approx(r.beta_star, rel=1e-9, abs=1e-13)
        np.testing.assert_allclose(hess[k], r.hessian, rtol=1e-7, atol=1e-9)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_relaxed_batch_scalar3d(name):
    impl = BACKENDS[name]
    insts = instances_scalar3d(5, 3)
    p = insts[0][2]
    d, e = _batch(insts)
    value, d_d, d_eps, *_rest = impl.relaxed_batch(d, e, p.alpha1, p.alpha2, p.epsT1, p.epsT2, p.w1, p.w2, 0.0)
    for k in range(d.size):
        r = eval_scalar3d(d[k], e[k], p)
        assert value[k] == pytest.approx(r.value, rel=1e-12, abs=1e-15)
        assert d_d[k] == pytest.approx(r.d_d, rel=1e-10, abs=1e-13)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree_bitwise_close():
    rng = np.random.default_rng(0)
    insts = instances_2d(1, 77, 2)
    p = insts[0][2]
    n = 2000
    d = rng.uniform(0, 1, n)
    e = rng.uniform(-0.1, 0.1, (n, 3))
    args = (d, e, p.alpha1, p.alpha2, p.epsT1, p.epsT2, p.w1, p.w2, gamma_star(p).value)
    a = BACKENDS["python"].relaxed_batch(*args)
    b = BACKENDS["cython"].relaxed_batch(*args)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-9, atol=1e-12)
    theta = np.linspace(0, np.pi, 64, endpoint=False)
    lam = (0.4, e[0]) + (p.alpha1, p.alpha2, p.epsT1, p.epsT2, p.w1, p.w2)
    np.testing.assert_allclose(BACKENDS["python"].rank1_energies(theta, *lam), BACKENDS["cython"].rank1_energies(theta, *lam), rtol=1e-12)
    geo = np.column_stack([rng.uniform(0, np.pi, (50, 3)), rng.uniform(0.05, 0.95, 50), rng.uniform(0, 1, 50)])
    np.testing.assert_allclose(BACKENDS["python"].rank2_energies(geo, *lam), BACKENDS["cython"].rank2_energies(geo, *lam), rtol=1e-10)


def test_regime_codes_match_labels():
    assert [int(x) for x in RegimeLabel] == [0, 1, 2, 3]


def test_benchmark_script_runs(tmp_path):
    import runpy
    from pathlib import Path

    bench = runpy.run_path(str(Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"))
    assert bench["main"](["--n", "200", "--repeat", "1", "--csv", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "b.csv").read_text().startswith("kernel,python_s,cython_s,speedup")


def test_pure_python_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MICROLAX_PURE_PYTHON="1")
    r = subprocess.run([sys.executable, "-c", "from microlax import kernels; print(kernels.BACKEND)"], env=env, capture_output=True, text=True)
    assert r.stdout.strip() == "python"
