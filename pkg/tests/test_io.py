"""Configuration parsing and output writers."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from microlax import io as mio
from microlax.field_solver import Grid
from microlax.phase_energy import LinearTheoryParams, PhaseParams
from microlax.tensor_core import cubic_mandel

TWO_PHASE = """
[phase1]
cubic = 1.0, 0.5, 0.25
eigenstrain = 0, 0, 0
w = 0.5
[phase2]
cubic = 2.0, 1.0, 0.5
eigenstrain = 0.1, 0.1, 0
[load]
sigma_ext = 0.01, 0, 0
"""


def cfg(text):
    return mio.parse_config_text(text)


# ---------------------------------------------------------------------------
# moduli


def test_cubic_modulus():
    cp = cfg("[m]\ncubic = 3, 1, 2\n")
    np.testing.assert_array_equal(mio.parse_modulus(cp, "m", 3), cubic_mandel(3, 1, 2))


def test_isotropic_modulus_matches_lame_form():
    lam, mu = 1.5, 0.75
    A = mio.parse_modulus(cfg(f"[m]\nisotropic = {lam}, {mu}\n"), "m", 3)
    np.testing.assert_allclose(A, cubic_mandel(lam + 2 * mu, lam, mu), atol=1e-15)


def test_scalar_and_matrix_moduli():
    np.testing.assert_array_equal(mio.parse_modulus(cfg("[m]\nscalar = 2.5\n"), "m", 2), 2.5 * np.eye(2))
    A = mio.parse_modulus(cfg("[m]\nmatrix = 2, 1, 1, 3\n"), "m", 2)
    np.testing.assert_array_equal(A, [[2, 1], [1, 3]])


def test_suffixed_modulus_key():
    cp = cfg("[linear]\nscalar = 1\nscalar2 = 4\n")
    assert mio.parse_modulus(cp, "linear", 1, suffix="2")[0, 0] == 4.0


@pytest.mark.parametrize(
    "body",
    [
        "",  # none given
        "scalar = 1\ncubic = 1, 0, 1\n",  # two given
        "cubic = 1, 0\n",  # wrong count
        "isotropic = 1, 2, 3\n",
        "scalar = 1, 2\n",
        "matrix = 1, 2, 3\n",
        "scalar = one\n",
    ],
)
def test_bad_modulus_is_config_error(body):
    with pytest.raises(mio.ConfigError):
        mio.parse_modulus(cfg("[m]\n" + body), "m", 3)


def test_cubic_rejected_outside_2d():
    with pytest.raises(mio.ConfigError):
        mio.parse_modulus(cfg("[m]\ncubic = 1, 0, 1\n"), "m", 2)


# ---------------------------------------------------------------------------
# parameters


def test_parse_two_phase_params():
    p = mio.parse_params(cfg(TWO_PHASE), "relaxed", 2)
    assert isinstance(p, PhaseParams)
    np.testing.assert_array_equal(p.epsT2, [0.1, 0.1, 0])
    assert p.w1 == 0.5 and p.w2 == 0.0
    np.testing.assert_array_equal(p.sigma_ext, [0.01, 0, 0])


def test_parse_linear_params():
    cp = cfg("[linear]\nscalar = 2\nscalar2 = 0.5\neigenstrain = 0.3\n")
    p = mio.parse_params(cp, "linear", 1)
    assert isinstance(p, LinearTheoryParams)
    assert p.C[0, 0] == 2.0 and p.C2[0, 0] == 0.5
    np.testing.assert_array_equal(p.eps_bar, [0.3])


def test_scalar3d_uses_two_components():
    cp = cfg("[phase1]\nscalar = 1\n[phase2]\nscalar = 1\neigenstrain = 0.2, 0\n")
    p = mio.parse_params(cp, "scalar3d", 2)
    assert p.ncomp == 2


@pytest.mark.parametrize(
    "text",
    [
        "[phase1]\nscalar = 1\n",  # missing phase2
        "[phase1]\nscalar = -1\n[phase2]\nscalar = 1\n",  # not positive definite
        "[phase1]\nmatrix = 1, 2, 0, 1\n[phase2]\nscalar = 1\n",  # not symmetric
        "[phase1]\nscalar = 1\n[phase2]\nscalar = 1\neigenstrain = 1, 2\n",  # size
    ],
)
def test_invalid_material_is_config_error(text):
    with pytest.raises(mio.ConfigError):
        mio.parse_params(cfg(text), "relaxed", 1)


def test_linear_needs_section():
    with pytest.raises(mio.ConfigError, match="linear"):
        mio.parse_params(cfg(TWO_PHASE), "linear", 2)


# ---------------------------------------------------------------------------
# grid, chemistry, simulation config


def test_grid_defaults_and_overrides():
    g = mio.parse_grid(cfg("[grid]\n"))
    assert g.shape == (64,) and g.lengths == (1.0,)
    g = mio.parse_grid(cfg("[grid]\ndim = 2\nnx = 8\nny = 4\nlx = 2\n"))
    assert g.shape == (4, 8) and g.lengths == (1.0, 2.0)


@pytest.mark.parametrize("body", ["dim = 3\n", "n = 1\n", "n = x\n", "length = -1\n"])
def test_bad_grid(body):
    with pytest.raises(mio.ConfigError):
        mio.parse_grid(cfg("[grid]\n" + body))


def test_chem_defaults_and_errors():
    c = mio.parse_chem(cfg("[chem]\ntheta = 0.7\n"))
    assert c.theta == 0.7
    with pytest.raises(mio.ConfigError):
        mio.parse_chem(cfg("[chem]\ntheta = -1\n"))


def sim_text(extra=""):
    return TWO_PHASE + "[grid]\ndim = 2\nn = 8\n[run]\nn_steps = 2\n" + extra


def test_build_sim_config_records_resolved_values():
    cp = cfg(sim_text())
    c = mio.build_sim_config(cp)
    assert c.variant == "relaxed" and c.seed == 0
    assert cp.get("run", "variant") == "relaxed" and cp.get("initial", "seed") == "0"
    cp = cfg(sim_text())
    c = mio.build_sim_config(cp, seed=7)
    assert c.seed == 7 and cp.get("initial", "seed") == "7"


def test_build_sim_config_solver_keys():
    cp = cfg(sim_text("[solver]\nenergy_slack = 1e-6\nrange_delta = 1e-3\nmobility = 2\n"))
    c = mio.build_sim_config(cp)
    assert (c.energy_slack, c.range_delta, c.mobility) == (1e-6, 1e-3, 2.0)


def test_build_sim_config_needs_end():
    with pytest.raises(mio.ConfigError, match="t_end or n_steps"):
        mio.build_sim_config(cfg(TWO_PHASE + "[grid]\ndim = 2\nn = 8\n"))


def test_build_sim_config_bad_stepper():
    with pytest.raises(mio.ConfigError):
        mio.build_sim_config(cfg(sim_text("stepper = leapfrog\n")))


def test_initial_fields_from_files(tmp_path):
    a = np.full((8, 8), 0.4)
    mio.write_field_csv(tmp_path / "a.csv", a)
    (tmp_path / "run.ini").write_text(sim_text("[initial]\na_file = a.csv\n"))
    cp = mio.read_config(tmp_path / "run.ini")
    c = mio.build_sim_config(cp, base_dir=tmp_path)
    np.testing.assert_array_equal(c.a_init, a)


def test_load_field_shape_mismatch(tmp_path):
    mio.write_field_csv(tmp_path / "a.csv", np.zeros((4, 4)))
    with pytest.raises(mio.ConfigError, match="values"):
        mio.load_field(tmp_path / "a.csv", (8, 8))
    with pytest.raises(mio.ConfigError):
        mio.load_field(tmp_path / "missing.csv", (8, 8))


def test_read_config_errors(tmp_path):
    with pytest.raises(mio.ConfigError):
        mio.read_config(tmp_path / "nope.ini")
    (tmp_path / "bad.ini").write_text("no section header\n")
    with pytest.raises(mio.ConfigError):
        mio.read_config(tmp_path / "bad.ini")


def test_inline_comments_and_round_trip():
    cp = cfg("[a]\nx = 1.5  # comment\n")
    assert mio._get(cp, "a", "x") == 1.5
    again = cfg(mio.config_text(cp))
    assert again.get("a", "x") == "1.5"


# ---------------------------------------------------------------------------
# writers


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips_floats(x):
    assert float(mio.fmt(x)) == x


def test_fmt_integers_and_bools():
    assert mio.fmt(3) == "3" and mio.fmt(np.int64(4)) == "4" and mio.fmt(True) == "1"
    assert mio.fmt(np.float32(0.5)) == "0.5"


def test_write_csv(tmp_path):
    mio.write_csv(tmp_path / "t.csv", ["x", "y"], [[1, 0.1], [2, np.nan]])
    assert (tmp_path / "t.csv").read_text() == "x,y\n1,0.1\n2,nan\n"


@pytest.mark.parametrize("shape", [(5,), (3, 4)])
def test_field_csv_round_trip(tmp_path, rng, shape):
    f = rng.standard_normal(shape)
    mio.write_field_csv(tmp_path / "f.csv", f)
    back = mio.read_field_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(back.reshape(shape), f)
    assert (tmp_path / "f.csv").read_text().splitlines()[0].startswith("row,c0")


def test_vtk_header_and_values(tmp_path):
    g = Grid((4, 6), (2.0, 3.0))
    a = np.arange(24.0).reshape(4, 6)
    mio.write_vtk(tmp_path / "f.vtk", g, {"a": a})
    lines = (tmp_path / "f.vtk").read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert "DIMENSIONS 6 4 1" in lines and "POINT_DATA 24" in lines
    assert "SPACING 0.5 0.5 1.0" in lines
    i = lines.index("SCALARS a double 1")
    assert [float(v) for v in lines[i + 2 : i + 26]] == list(range(24))


def test_manifest_is_sorted_json(tmp_path):
    mio.write_manifest(tmp_path / "m.json", {"b": 1, "a": [0.5]})
    text = (tmp_path / "m.json").read_text()
    assert json.loads(text) == {"a": [0.5], "b": 1}
    assert text.index('"a"') < text.index('"b"')
