"""Refinement studies: observed orders and table bookkeeping."""

import numpy as np
import pytest

from microlax import io as mio
from microlax.convergence import HEADER, _block_mean, _orders, ab_distance, elastic_study, smooth_fraction, time_study
from microlax.field_solver import Grid, SimConfig

TWO_PHASE_2D = "[phase1]\ncubic = 1.0, 0.5, 0.25\n[phase2]\ncubic = 2.0, 1.0, 0.5\neigenstrain = 0.1, 0.1, 0\n"


def by_quantity(rows, q):
    return [r for r in rows if r[3] == q]


def test_elastic_grid_refinement_is_second_order():
    p = mio.parse_params(mio.parse_config_text(TWO_PHASE_2D), "relaxed", 2)
    rows = elastic_study(p, (1.0, 1.0), base_n=8, levels=4)
    assert all(len(r) == len(HEADER) for r in rows)
    energy = by_quantity(rows, "energy")
    strain = by_quantity(rows, "strain_rms")
    assert [r[1] for r in energy] == [8, 16, 32, 64]
    assert min(r[5] for r in energy[1:3]) >= 1.8
    assert min(r[5] for r in strain[1:3]) >= 1.7
    assert np.isnan(energy[-1][4]) and np.isnan(energy[0][5])


def test_elastic_1d_strain_order():
    cp = mio.parse_config_text("[phase1]\nscalar = 1\n[phase2]\nscalar = 2\neigenstrain = 0.1\n")
    rows = elastic_study(mio.parse_params(cp, "relaxed", 1), (1.0,), base_n=8, levels=4)
    orders = [r[5] for r in by_quantity(rows, "strain_rms")[1:3]]
    assert orders == pytest.approx([2.0, 2.0], abs=0.05)


def test_time_refinement_is_first_order():
    cp = mio.parse_config_text(TWO_PHASE_2D + "[grid]\ndim = 2\nn = 16\n[run]\nt_end = 0.004\n")
    cfg = mio.build_sim_config(cp)
    rows = time_study(cfg, base_dt=1e-3, t_end=0.004, levels=4)
    assert [r[2] for r in rows] == [1e-3, 5e-4, 2.5e-4, 1.25e-4]
    orders = [r[5] for r in rows[1:3]]
    assert orders == pytest.approx([1.0, 1.0], abs=0.1)


def test_self_distance_is_zero(rng):
    g = Grid((8,), (1.0,))

    class S:
        a = rng.random(8)
        b = rng.random(8)

    assert ab_distance(S, S, g) == 0.0


def test_block_mean_of_refined_constant_field():
    f = np.full((16, 2), 3.0)
    np.testing.assert_array_equal(_block_mean(f, 2), np.full((8, 2), 3.0))
    f2 = np.arange(16.0).reshape(4, 4, 1)
    np.testing.assert_array_equal(_block_mean(f2, 2)[..., 0], [[2.5, 4.5], [10.5, 12.5]])


def test_orders_of_geometric_sequence():
    errs = [1.0, 0.25, 0.0625, np.nan]
    o = _orders(errs)
    assert np.isnan(o[0]) and o[1:3] == [2.0, 2.0] and np.isnan(o[3])


def test_smooth_fraction_bounds():
    for g in (Grid((16,), (1.0,)), Grid((8, 8), (1.0, 2.0))):
        f = smooth_fraction(g, 0.5, 0.3)
        assert f.shape == g.shape and f.min() >= 0.2 - 1e-15 and f.max() <= 0.8 + 1e-15


@pytest.mark.parametrize("study", ["elastic", "time"])
def test_too_few_levels(study):
    if study == "elastic":
        p = mio.parse_params(mio.parse_config_text(TWO_PHASE_2D), "relaxed", 2)
        with pytest.raises(ValueError):
            elastic_study(p, (1.0, 1.0), 8, 2)
    else:
        with pytest.raises(ValueError):
            time_study(SimConfig.__new__(SimConfig), 1e-3, 1e-2, 2)
