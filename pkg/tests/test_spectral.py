import math

import numpy as np
import pytest

from riemannwave.core.exceptions import GridMismatchError, NonzeroMeanError
from riemannwave.numerics import spectral
from riemannwave.numerics.spectral import FilterRule, Grid, SpectralField
from riemannwave.utils.sampling import random_field
from tests.conftest import mode


def test_hilbert_of_single_modes(grid):
    np.testing.assert_allclose(spectral.hilbert(mode(grid, -1)).values, mode(grid, -1).values, atol=1e-14)
    np.testing.assert_allclose(spectral.hilbert(mode(grid, 3)).values, -mode(grid, 3).values, atol=1e-14)
    np.testing.assert_allclose(spectral.hilbert(SpectralField.constant(grid, 2.0)).values, 0, atol=1e-14)


def test_nyquist_and_zero_modes_are_holomorphic(grid):
    mask = spectral.projection_mask(grid, "holo")
    assert mask[0] == 1
    assert mask[grid.N // 2] == 1
    assert spectral.projection_mask(grid, "anti")[grid.N // 2] == 0


def test_hilbert_squares_to_identity_mod_mean(grid, rng):
    f = random_field(grid, rng, mean_zero=False)
    twice = spectral.hilbert(spectral.hilbert(f))
    np.testing.assert_allclose(twice.values, (f - spectral.mean(f)).values, atol=1e-13)


def test_projections_split_and_annihilate(grid, rng):
    f = random_field(grid, rng, mean_zero=False)
    holo, anti = spectral.project(f, "holo"), spectral.project(f, "anti")
    np.testing.assert_allclose((holo + anti).values, f.values, atol=1e-14)
    np.testing.assert_array_equal(spectral.project(holo, "anti").coeffs, 0)
    np.testing.assert_allclose(spectral.project(holo, "holo").values, holo.values, atol=1e-15)


def test_projection_rejects_unknown_side(grid):
    with pytest.raises(ValueError):
        spectral.projection_mask(grid, "left")


def test_derivative_and_antiderivative(grid, rng):
    f = random_field(grid, rng)
    np.testing.assert_allclose(spectral.derivative(spectral.antiderivative(f)).values, f.values, atol=1e-13)
    np.testing.assert_allclose(spectral.derivative(mode(grid, 2)).values, (2j * mode(grid, 2)).values, atol=1e-12)


def test_antiderivative_strict_mean(grid):
    one = SpectralField.constant(grid, 1.0)
    with pytest.raises(NonzeroMeanError):
        spectral.antiderivative(one)
    np.testing.assert_allclose(spectral.antiderivative(one, strict=False).values, 0, atol=1e-15)


def test_integral_and_inner_match_trapezoid(grid, rng):
    f, g = random_field(grid, rng, mean_zero=False), random_field(grid, rng)
    trapezoid = grid.spacing * np.sum(f.values * np.conj(g.values))
    np.testing.assert_allclose(spectral.inner(f, g), trapezoid, rtol=1e-12)
    np.testing.assert_allclose(spectral.integral(SpectralField.constant(grid, 1.0)), grid.L)


def test_hhalf_norm_of_a_mode():
    for L in (2 * math.pi, 4 * math.pi):
        g = Grid(64, L)
        f = mode(g, 3)
        k = 2 * math.pi * 3 / L
        np.testing.assert_allclose(spectral.norm(f, "Hhalf"), math.sqrt(L * k), rtol=1e-12)


def test_hhalf_identity_for_mixed_fields(grid, rng):
    f = random_field(grid, rng)
    lhs = spectral.inner(1j * spectral.derivative(f), f)
    holo = spectral.norm(spectral.project(f, "holo"), "Hhalf") ** 2
    anti = spectral.norm(spectral.project(f, "anti"), "Hhalf") ** 2
    np.testing.assert_allclose(lhs, holo - anti, rtol=1e-10)


def test_norm_kinds(grid):
    f = mode(grid, 1, 2.0)
    np.testing.assert_allclose(spectral.norm(f, "Linf"), 2.0)
    np.testing.assert_allclose(spectral.norm(f), 2.0 * math.sqrt(grid.L))
    np.testing.assert_allclose(spectral.norm(f, "Hs", 2), 2.0 * math.sqrt(grid.L))
    with pytest.raises(ValueError):
        spectral.norm(f, "Hs", 5)


def test_grid_mismatch():
    with pytest.raises(GridMismatchError):
        SpectralField.zeros(Grid(32)) + SpectralField.zeros(Grid(64))


def test_krasny_filter_drops_small_modes(grid):
    f = mode(grid, -1) + mode(grid, -5, 1e-15)
    filtered = spectral.spectral_filter(f, FilterRule("krasny", 1e-13))
    np.testing.assert_allclose(filtered.values, mode(grid, -1).values, atol=1e-14)


def test_smooth_filter_keeps_low_modes(grid):
    f = mode(grid, -2)
    filtered = spectral.spectral_filter(f, FilterRule("smooth36"))
    np.testing.assert_allclose(filtered.values, f.values, atol=1e-14)


def test_powers_are_filtered_like_products(rng):
    grid = Grid(64, dealias=FilterRule("smooth36"))
    f = random_field(grid, rng)
    expected = spectral.spectral_filter(SpectralField(grid, f.values**3), grid.dealias)
    np.testing.assert_allclose((f**3).values, expected.values, atol=1e-14)
    np.testing.assert_allclose((f**2).values, (f * f).values, atol=1e-14)


def test_holomorphy_residual(grid, rng):
    assert spectral.holomorphy_residual(random_field(grid, rng, side="holo")) == 0
    assert spectral.holomorphy_residual(mode(grid, 1)) > 1
