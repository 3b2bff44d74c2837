"""Command-line interface: outputs, files and exit codes."""

import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from microlax import cli
from microlax.relaxed_energy import gamma_star
from microlax.phase_energy import PhaseParams

NONCOMMUTING = """
[phase1]
scalar = 1
[phase2]
matrix = 2, 0.3, 0.1, 0.3, 1, 0, 0.1, 0, 1.5
eigenstrain = 1, 1, 0
[point]
d = 0.5
eps = 0, 0, 0
"""

SIM_1D = """
[run]
n_steps = 20
dt = 1e-4
snapshot_every = 10
[grid]
dim = 1
n = 32
[phase1]
scalar = 1
[phase2]
scalar = 2
eigenstrain = 0.1
[load]
sigma_ext = 0.01
[initial]
a0 = 0.5
b0 = 0.1
noise = 0.01
seed = 3
"""


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def parse_energy(out):
    vals = {}
    for line in out.strip().splitlines():
        k, v = line.split(" = ", 1)
        vals[k] = v
    return vals


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# energy


def test_energy_worked_1d_instance(tmp_path, capsys):
    path = write(tmp_path, "[phase1]\nscalar = 1\n[phase2]\nscalar = 2\neigenstrain = 1\n[point]\nd = 0.5\neps = 0.5\n")
    assert cli.main(["energy", "--config", path, "--out", str(tmp_path / "o")]) == 0
    v = parse_energy(capsys.readouterr().out)
    assert abs(float(v["value"])) <= 1e-12
    assert v["regime"] == "1 (One)"
    row = read_rows(tmp_path / "o" / "energy.csv")[0]
    assert float(row["d"]) == 0.5 and int(row["regime"]) == 1


def test_energy_at_pure_phase_is_that_phase(tmp_path, capsys):
    # d = 1 is pure phase 1: value is W1(eps) = 0.5 * 1 * 0.3**2 + w1
    path = write(tmp_path, "[phase1]\nscalar = 1\nw = 0.2\n[phase2]\nscalar = 2\neigenstrain = 1\n[point]\nd = 1\neps = 0.3\n")
    assert cli.main(["energy", "--config", path]) == 0
    v = parse_energy(capsys.readouterr().out)
    assert float(v["value"]) == pytest.approx(0.5 * 0.09 + 0.2, abs=1e-14)


def test_energy_scalar3d_equal_moduli_strain(tmp_path, capsys):
    f, t, d = np.array([0.3, 0.1]), np.array([0.2, 0.4]), 0.25
    text = f"[phase1]\nscalar = 1\n[phase2]\nscalar = 1\neigenstrain = {t[0]}, {t[1]}\n[point]\nd = {d}\neps = {f[0]}, {f[1]}\n"
    path = write(tmp_path, text)
    assert cli.main(["energy", "--config", path, "--variant", "scalar3d"]) == 0
    v = parse_energy(capsys.readouterr().out)
    eps1 = np.array([float(x) for x in v["eps1_star"].split(",")])
    np.testing.assert_allclose(eps1, f - (1 - d) * t, atol=1e-14)


def test_energy_extension_outside_unit_interval(tmp_path, capsys):
    path = write(tmp_path, "[phase1]\nscalar = 1\n[phase2]\nscalar = 2\neigenstrain = 1\n[point]\nd = 1.5\neps = 0.5\n")
    assert cli.main(["energy", "--config", path]) == 0
    assert "value" in capsys.readouterr().out


def test_energy_evaluator_error_exit_3(tmp_path, capsys):
    assert cli.main(["energy", "--config", write(tmp_path, NONCOMMUTING)]) == 3
    assert "NonCommuting" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text",
    [
        "[phase1]\nscalar = 1\n[phase2]\nscalar = 1\n",  # no [point]
        "[phase1]\nscalar = 1\n[phase2]\nscalar = 1\n[point]\nd = 0.5\neps = 1, 2\n",  # size mismatch
        "[phase1]\nscalar = -1\n[phase2]\nscalar = 1\n[point]\nd = 0.5\neps = 0\n",  # indefinite
        "[run]\nvariant = quadratic\n[phase1]\nscalar = 1\n[phase2]\nscalar = 1\n[point]\nd = 0.5\neps = 0\n",
    ],
)
def test_energy_usage_errors_exit_2(tmp_path, text):
    assert cli.main(["energy", "--config", write(tmp_path, text)]) == 2


def test_argparse_errors_exit_2(tmp_path):
    assert cli.main([]) == 2
    assert cli.main(["energy"]) == 2
    assert cli.main(["energy", "--config", "x", "--variant", "bogus"]) == 2
    assert cli.main(["energy", "--config", str(tmp_path / "missing.ini")]) == 2


# ---------------------------------------------------------------------------
# regime map


def run_map(tmp_path, text):
    code = cli.main(["regime-map", "--config", write(tmp_path, text), "--out", str(tmp_path / "m")])
    return code, read_rows(tmp_path / "m" / "regime_map.csv")


def test_map_homogeneous_data_is_regime_zero(tmp_path):
    text = "[phase1]\ncubic = 2, 1, 0.5\n[phase2]\ncubic = 2, 1, 0.5\n[point]\nd = 0.5\neps = 0, 0, 0\n"
    text += "[map]\nx = d, 0.05, 0.95, 5\ny = eps0, -1, 1, 4\n"
    code, rows = run_map(tmp_path, text)
    assert code == 0 and len(rows) == 20
    assert {r["regime"] for r in rows} == {"0"}


def test_map_identity_family_is_regime_three_at_gamma_star(tmp_path):
    text = "[phase1]\nscalar = 1\n[phase2]\nscalar = 1\neigenstrain = 1, 1, 0\n[point]\nd = 0.5\neps = 0, 0, 0\n"
    text += "[map]\nx = d, 0.05, 0.95, 7\ny = scale, 0.5, 2, 4\n"
    code, rows = run_map(tmp_path, text)
    assert code == 0
    assert {r["regime"] for r in rows} == {"3"}
    assert all(abs(float(r["beta_star"]) - 1.0) <= 1e-12 for r in rows)


def test_map_mixed_family_has_contiguous_regime_two_band(tmp_path):
    text = "[phase1]\nscalar = 1\n[phase2]\ncubic = 2, 0.5, 1\neigenstrain = 2, 1, 0\n[point]\nd = 0.5\neps = 0, 0, 0\n"
    text += "[map]\nx = eps0, -3, 3, 25\ny = d, 0.2, 0.8, 3\n"
    code, rows = run_map(tmp_path, text)
    assert code == 0
    p = PhaseParams(np.eye(3), np.array([[2, 0.5, 0], [0.5, 2, 0], [0, 0, 2]]), np.zeros(3), np.array([2.0, 1.0, 0.0]))
    g = gamma_star(p).value
    for dval in {r["d"] for r in rows}:
        line = [r for r in rows if r["d"] == dval]
        labels = [int(r["regime"]) for r in line]
        idx = [i for i, lab in enumerate(labels) if lab == 2]
        assert idx and idx == list(range(idx[0], idx[-1] + 1))
        for i in idx:
            assert 0.0 < float(line[i]["beta_star"]) < g
        assert labels[-1] == 3


def test_map_partial_and_total_failure(tmp_path):
    base = NONCOMMUTING
    code, rows = run_map(tmp_path, base + "[map]\nx = scale, 0, 1, 3\ny = d, 0.2, 0.8, 2\n")
    assert code == 4
    flagged = [r for r in rows if r["flagged"] == "1"]
    assert 0 < len(flagged) < len(rows)
    assert all(r["error"] == "NonCommuting" for r in flagged)
    code, rows = run_map(tmp_path, base + "[map]\nx = scale, 0.5, 1, 3\ny = d, 0.2, 0.8, 2\n")
    assert code == 3 and all(r["flagged"] == "1" for r in rows)


def test_map_bad_axis_exit_2(tmp_path):
    text = NONCOMMUTING + "[map]\nx = theta, 0, 1, 3\ny = d, 0, 1, 3\n"
    assert cli.main(["regime-map", "--config", write(tmp_path, text)]) == 2


# ---------------------------------------------------------------------------
# verify


def test_verify_suite_passes(tmp_path, capsys):
    assert cli.main(["verify", "--suite", "regimes", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "verify_report.csv")
    assert rows and all(r["passed"] == "1" for r in rows)
    assert "PASS regimes.Id_beta_err" in capsys.readouterr().out


def test_verify_impossible_tolerance_exit_1(tmp_path, capsys):
    path = write(tmp_path, "[verify]\nregimes.gamma_star_identity_err = -1\n")
    assert cli.main(["verify", "--suite", "regimes", "--config", path]) == 1
    assert "FAIL regimes.gamma_star_identity_err" in capsys.readouterr().out


def test_verify_override_is_case_insensitive(tmp_path, capsys):
    path = write(tmp_path, "[verify]\nregimes.Id_beta_err = -1\n")
    assert cli.main(["verify", "--suite", "regimes", "--config", path]) == 1
    assert "FAIL regimes.Id_beta_err" in capsys.readouterr().out


def test_verify_unknown_suite_exit_2():
    assert cli.main(["verify", "--suite", "nope"]) == 2


# ---------------------------------------------------------------------------
# simulate


def test_simulate_writes_outputs(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["simulate", "--config", write(tmp_path, SIM_1D), "--out", str(out)]) == 0
    diag = read_rows(out / "diagnostics.csv")
    assert [int(r["step"]) for r in diag] == list(range(21))
    F = np.array([float(r["energy"]) for r in diag])
    assert np.all(np.diff(F) <= 1e-9 * np.abs(F[:-1]).max())
    for tag in ("000000", "000010", "000020"):
        for f in ("a", "b", "mu"):
            assert (out / f"{f}_{tag}.csv").exists()
    m = json.loads((out / "manifest.json").read_text())
    assert m["status"] == "ok" and m["seed"] == 3 and m["final"]["step"] == 20.0
    assert "seed = 3" in (out / "resolved_config.ini").read_text()


def test_simulate_zero_end_time_writes_initial_state_only(tmp_path):
    out = tmp_path / "run"
    text = SIM_1D.replace("n_steps = 20", "t_end = 0")
    assert cli.main(["simulate", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    assert len(read_rows(out / "diagnostics.csv")) == 1
    assert sorted(p.name for p in out.glob("a_*.csv")) == ["a_000000.csv"]


def test_simulate_failure_exit_5_keeps_partial_record(tmp_path, capsys):
    out = tmp_path / "run"
    text = SIM_1D + "[solver]\nenergy_slack = -1\nmax_halvings = 2\n"
    assert cli.main(["simulate", "--config", write(tmp_path, text), "--out", str(out)]) == 5
    assert "StepFailure" in capsys.readouterr().err
    m = json.loads((out / "manifest.json").read_text())
    assert m["status"] == "failed"
    rows = read_rows(out / "diagnostics.csv")
    assert len(rows) >= 1 and rows[0]["step"] == "0"
    assert (out / "a_000000.csv").exists()


def test_simulate_deterministic_runs_are_identical(tmp_path):
    text = SIM_1D.replace("dim = 1\nn = 32", "dim = 2\nn = 8").replace("eigenstrain = 0.1", "eigenstrain = 0.1, 0.1, 0")
    path = write(tmp_path, text.replace("sigma_ext = 0.01", "sigma_ext = 0.01, 0, 0"))
    outs = [tmp_path / "r1", tmp_path / "r2"]
    for o in outs:
        assert cli.main(["simulate", "--config", path, "--out", str(o), "--deterministic"]) == 0
    names = sorted(p.name for p in outs[0].iterdir() if p.name != "manifest.json")
    assert names == sorted(p.name for p in outs[1].iterdir() if p.name != "manifest.json")
    for n in names:
        assert (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes(), n


def test_simulate_seed_override(tmp_path):
    path = write(tmp_path, SIM_1D)
    cli.main(["simulate", "--config", path, "--out", str(tmp_path / "a"), "--seed", "3"])
    cli.main(["simulate", "--config", path, "--out", str(tmp_path / "b"), "--seed", "4"])
    a = (tmp_path / "a" / "a_000000.csv").read_bytes()
    assert a == (tmp_path / "a" / "a_000000.csv").read_bytes()
    assert a != (tmp_path / "b" / "a_000000.csv").read_bytes()
    assert json.loads((tmp_path / "b" / "manifest.json").read_text())["seed"] == 4


def test_simulate_usage_errors(tmp_path):
    path = write(tmp_path, SIM_1D)
    assert cli.main(["simulate", "--config", path]) == 2
    bad = write(tmp_path, SIM_1D.replace("[phase2]\nscalar = 2", "[phase2]\nscalar = -2"), "bad.ini")
    assert cli.main(["simulate", "--config", bad, "--out", str(tmp_path / "o")]) == 2


# ---------------------------------------------------------------------------
# convergence


def test_convergence_needs_three_levels(tmp_path):
    text = "[convergence]\nkind = elastic\nlevels = 2\n[phase1]\nscalar = 1\n[phase2]\nscalar = 2\n"
    assert cli.main(["convergence", "--config", write(tmp_path, text)]) == 2


def test_convergence_unknown_kind(tmp_path):
    text = "[convergence]\nkind = spatial\n[phase1]\nscalar = 1\n[phase2]\nscalar = 2\n"
    assert cli.main(["convergence", "--config", write(tmp_path, text)]) == 2


def test_convergence_writes_table(tmp_path):
    text = "[convergence]\nkind = elastic\nlevels = 3\nbase_n = 8\n[grid]\ndim = 1\n"
    text += "[phase1]\nscalar = 1\n[phase2]\nscalar = 2\neigenstrain = 0.1\n"
    assert cli.main(["convergence", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "convergence.csv")
    assert [r["quantity"] for r in rows] == ["energy"] * 3 + ["strain_rms"] * 3
    assert rows[-1]["error"] == "nan"


# ---------------------------------------------------------------------------
# threads


def test_thread_count(monkeypatch):
    monkeypatch.delenv("MICROLAX_THREADS", raising=False)
    assert cli.thread_count() == 1
    monkeypatch.setenv("MICROLAX_THREADS", "4")
    assert cli.thread_count() == 4
    assert cli.thread_count(deterministic=True) == 1
    for bad in ("0", "-3", "many"):
        monkeypatch.setenv("MICROLAX_THREADS", bad)
        assert cli.thread_count() == 1


def test_thread_limit_restores_environment(monkeypatch):
    monkeypatch.setenv("MICROLAX_THREADS", "3")
    with cli.thread_limit(1):
        assert os.environ["MICROLAX_THREADS"] == "1"
    assert os.environ["MICROLAX_THREADS"] == "3"


# ---------------------------------------------------------------------------
# installed entry points


def test_module_entry_point(tmp_path):
    path = write(tmp_path, "[phase1]\nscalar = 1\n[phase2]\nscalar = 2\neigenstrain = 1\n[point]\nd = 0.5\neps = 0.5\n")
    r = subprocess.run([sys.executable, "-m", "microlax", "energy", "--config", path], capture_output=True, text=True)
    assert r.returncode == 0 and "regime = 1 (One)" in r.stdout
    r = subprocess.run([sys.executable, "-m", "microlax", "energy"], capture_output=True, text=True)
    assert r.returncode == 2
