import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from microlax.field_solver import (
    Grid,
    flux_divergence,
    gradient_energy,
    green_apply,
    laplacian_neumann,
    m_norm_sq,
)
from microlax.field_solver.grid import dct, flux_field, idct

GRIDS = [Grid((32,), (2.0,)), Grid((12, 20), (0.6, 1.0))]


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid((3,), (1.0,))
    with pytest.raises(ValueError):
        Grid((8, 8), (1.0,))
    with pytest.raises(ValueError):
        Grid((8,), (0.0,))
    g = Grid.uniform(2, 8, 2.0)
    assert g.spacing == (0.25, 0.25) and g.ncells == 64 and g.cell_volume == 0.0625


@pytest.mark.parametrize("g", GRIDS)
def test_laplacian_constant_and_conservation(g, rng):
    np.testing.assert_array_equal(laplacian_neumann(np.full(g.shape, 3.7), g), 0.0)
    f = rng.normal(size=g.shape)
    assert abs(laplacian_neumann(f, g).sum()) <= 1e-12 * np.linalg.norm(f) * max(1.0, 1.0 / min(g.spacing) ** 2)


def test_laplacian_cosine_order():
    errs = []
    L = 2.0
    for n in (16, 32, 64, 128):
        g = Grid((n,), (L,))
        x = g.centers()[0]
        f = np.cos(np.pi * x / L)
        errs.append(np.abs(laplacian_neumann(f, g) + (np.pi / L) ** 2 * f).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() >= 1.9


@pytest.mark.parametrize("g", GRIDS)
def test_dct_round_trip_and_symbol(g, rng):
    f = rng.normal(size=g.shape)
    np.testing.assert_allclose(idct(dct(f)), f, atol=1e-13)
    np.testing.assert_allclose(idct(g.laplacian_symbol() * dct(f)), laplacian_neumann(f, g), atol=1e-10)


@pytest.mark.parametrize("g", GRIDS)
def test_green_apply_inverts_laplacian(g, rng):
    np.testing.assert_array_equal(green_apply(np.zeros(g.shape), g), 0.0)
    f = rng.normal(size=g.shape)
    f -= f.mean()
    w = green_apply(f, g, mobility=2.5)
    assert abs(w.mean()) <= 1e-13
    np.testing.assert_allclose(-2.5 * laplacian_neumann(w, g), f, atol=1e-10)
    assert m_norm_sq(f, g, 2.5) > 0


def test_green_apply_eigenfunction():
    L, M = 1.5, 2.0
    errs = []
    for n in (32, 64, 128):
        g = Grid((n,), (L,))
        f = np.cos(np.pi * g.centers()[0] / L)
        errs.append(np.abs(green_apply(f, g, M) - f * (L / np.pi) ** 2 / M).max())
    assert errs[-1] <= 1e-4
    assert np.log2(errs[0] / errs[1]) >= 1.9


@given(arrays(float, (10,), elements=st.floats(-1, 1)))
def test_m_norm_positive_on_mean_zero(f):
    f = f - f.mean()
    g = Grid((10,), (1.0,))
    if np.abs(f).max() > 1e-8:
        assert m_norm_sq(f, g) > 0


@pytest.mark.parametrize("g", GRIDS)
def test_gradient_energy_summation_by_parts(g, rng):
    f = rng.normal(size=g.shape)
    assert gradient_energy(f, g) == pytest.approx(-0.5 * g.cell_volume * np.sum(f * laplacian_neumann(f, g)), rel=1e-12)


@pytest.mark.parametrize("g", GRIDS)
def test_flux_field_properties(g, rng):
    for J in flux_field(np.full(g.shape, 2.0), g, 3.0):
        np.testing.assert_array_equal(J, 0.0)
    mu = rng.normal(size=g.shape)
    J = flux_field(mu, g, 3.0)
    for ax, Jk in enumerate(J):
        np.testing.assert_array_equal(np.take(Jk, 0, axis=ax), 0.0)
        np.testing.assert_array_equal(np.take(Jk, -1, axis=ax), 0.0)
    np.testing.assert_allclose(-flux_divergence(J, g), 3.0 * laplacian_neumann(mu, g), atol=1e-10)


def test_flux_of_linear_potential():
    g = Grid((16,), (1.0,))
    mu = 0.7 * g.centers()[0]
    (J,) = flux_field(mu, g, 2.0)
    np.testing.assert_allclose(J[1:-1], -2.0 * 0.7, rtol=1e-12)
