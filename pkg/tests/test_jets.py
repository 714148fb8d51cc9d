import numpy as np
import pytest

from riemannwave.core.exceptions import ChordArcError, JetOrderError
from riemannwave.numerics import spectral
from riemannwave.numerics.calculus import commutator_hilbert
from riemannwave.numerics.evolution import WaveState, compute_aux, step
from riemannwave.numerics.jets import (
    MaterialJet,
    build_base_jets,
    jet_derivative,
    jet_hilbert,
    jet_product,
    jet_reciprocal,
)
from riemannwave.numerics.spectral import SpectralField
from riemannwave.utils.sampling import random_field


def _jet(grid, rng, order):
    return MaterialJet(tuple(random_field(grid, rng, mean_zero=False) for _ in range(order + 1)))


def test_product_follows_leibniz(grid, rng):
    a, b = _jet(grid, rng, 2), _jet(grid, rng, 2)
    p = jet_product(a, b)
    expected = a[0] * b[2] + 2 * (a[1] * b[1]) + a[2] * b[0]
    np.testing.assert_allclose(p[2].values, expected.values, atol=1e-12)


def test_reciprocal_inverts(grid, rng):
    a = _jet(grid, rng, 3) * 0.05 + 1.0
    one = a * jet_reciprocal(a)
    np.testing.assert_allclose(one[0].values, 1.0, atol=1e-13)
    for k in range(1, 4):
        np.testing.assert_allclose(one[k].values, 0.0, atol=1e-11)


def test_order_mismatch_and_overreach(grid, rng):
    a, b = _jet(grid, rng, 2), _jet(grid, rng, 3)
    with pytest.raises(JetOrderError):
        a + b
    with pytest.raises(JetOrderError):
        a[3]
    with pytest.raises(JetOrderError):
        a.truncate(3)
    with pytest.raises(JetOrderError):
        MaterialJet((a[0],)).shift()


def test_derivative_of_a_frozen_field(grid, rng):
    # D_t f = 0 gives D_t d f = -b_a d f
    f = random_field(grid, rng)
    b = MaterialJet.static(random_field(grid, rng).real, 1)
    d = jet_derivative(MaterialJet.static(f, 1), b)
    expected = -(spectral.derivative(b[0]) * spectral.derivative(f))
    np.testing.assert_allclose(d[1].values, expected.values, atol=1e-12)


def test_derivative_needs_b(grid, rng):
    with pytest.raises(JetOrderError):
        jet_derivative(_jet(grid, rng, 2), None)


def test_hilbert_jet_is_the_commutator_form(grid, rng):
    a = _jet(grid, rng, 1)
    b = MaterialJet.static(random_field(grid, rng).real, 1)
    h = jet_hilbert(a, b)
    expected = spectral.hilbert(a[1]) + commutator_hilbert(b[0], a[0], differentiate=True)
    np.testing.assert_allclose(h[0].values, spectral.hilbert(a[0]).values, atol=1e-13)
    np.testing.assert_allclose(h[1].values, expected.values, atol=1e-11)


def test_flat_state_jets_vanish(grid):
    jets = build_base_jets(WaveState.flat(grid), 4)
    for name in ("zeta", "zt", "b", "ztt"):
        for component in getattr(jets, name).components:
            assert component.max_abs() == 0
    np.testing.assert_array_equal(jets.a1[0].values, 1.0)


def test_first_components_match_aux(state):
    jets = build_base_jets(state, 2)
    aux = compute_aux(state)
    np.testing.assert_allclose(jets.a1[0].values, aux.a1.values, atol=1e-13)
    np.testing.assert_allclose(jets.b[0].values, aux.b.values, atol=1e-13)
    np.testing.assert_allclose(jets.zt[1].values, aux.ztt.values, atol=1e-13)


def test_second_material_derivative_matches_time_differences(state):
    """D_t Z_tt from jets against a centered difference along the flow."""
    dt = 1e-3
    jets = build_base_jets(state, 2)
    ahead = compute_aux(step(state, dt)).ztt
    behind = compute_aux(step(state, -dt, allow_backward=True)).ztt
    ztt = compute_aux(state).ztt
    material = (ahead - behind) / (2 * dt) + jets.b[0] * spectral.derivative(ztt)
    error = (material - jets.zt[2]).max_abs() / jets.zt[2].max_abs()
    assert error < 1e-4


def test_order_bounds(state):
    with pytest.raises(JetOrderError):
        build_base_jets(state, 7)


def test_chord_arc_guard(grid):
    zeta = SpectralField.from_coeffs(grid, np.where(np.arange(grid.N) == grid.N - 1, 1j * 0.9999999, 0))
    with pytest.raises(ChordArcError):
        build_base_jets(WaveState(0.0, zeta, SpectralField.zeros(grid)), 1)
