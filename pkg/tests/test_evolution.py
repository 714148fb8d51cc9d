import math

import numpy as np
import pytest

from riemannwave.core.exceptions import BlowUpError, SteepnessError, TimeStepError
from riemannwave.numerics import spectral
from riemannwave.numerics.evolution import (
    InitialProfile,
    WaveState,
    a1_commutator_form,
    compute_aux,
    make_initial_data,
    max_stable_dt,
    rescale_state,
    residuals,
    simulate,
    step,
    tile_state,
)
from riemannwave.numerics.spectral import FilterRule, Grid, SpectralField, norm
from tests.conftest import mode


def test_single_mode_aux(grid, single_mode):
    eps, state = single_mode
    aux = compute_aux(state)
    np.testing.assert_allclose(aux.a1.values, 1 + eps**2, atol=1e-14)
    np.testing.assert_allclose(aux.b.values, 2 * eps * np.cos(grid.points), atol=1e-14)
    assert aux.a1_imag_residue < 1e-15


def test_a1_two_ways(state):
    np.testing.assert_allclose(a1_commutator_form(state).values, compute_aux(state).a1.values, atol=1e-12)


def test_a1_not_below_one(state):
    assert np.min(compute_aux(state).a1.values.real) >= 1 - 1e-12


def test_flat_state_is_stationary(grid):
    out = step(WaveState.flat(grid), 0.01)
    assert out.zeta.max_abs() == 0
    assert out.zt.max_abs() == 0
    assert out.t == pytest.approx(0.01)


def test_step_rejects_bad_dt(state):
    with pytest.raises(TimeStepError):
        step(state, 0.0)
    with pytest.raises(TimeStepError):
        step(state, -1e-3)
    with pytest.raises(TimeStepError):
        step(state, 10 * max_stable_dt(state))


def test_forward_then_backward(state):
    dt = 1e-3
    there = step(state, dt)
    back = step(there, -dt, allow_backward=True)
    assert (back.zeta - state.zeta).max_abs() < 1e-10
    assert (back.zt - state.zt).max_abs() < 1e-10


def test_constraints_survive_a_short_run(state):
    dt = 0.5 * max_stable_dt(state)
    *_, (n, last) = simulate(state, dt, 10, report_every=5)
    assert n == 10
    r = residuals(last)
    assert r.holo_zt < 1e-8
    assert r.holo_inv_za < 1e-8


def test_projection_removes_antiholomorphic_parts(state):
    dirty = WaveState(0.0, state.zeta + 1e-6 * mode(state.grid, 2), state.zt)
    out = step(dirty, 1e-3, project_constraints=True)
    assert spectral.holomorphy_residual(out.zeta) == 0


def test_simulate_yields_reports(state):
    steps = [n for n, _ in simulate(state, 1e-3, 7, report_every=3)]
    assert steps == [0, 3, 6, 7]


def test_initial_data_is_scaled_to_epsilon():
    grid = Grid(64)
    for profile in (InitialProfile(), InitialProfile("packet", k_center=3.0)):
        state = make_initial_data(profile, 0.02, grid)
        assert residuals(state).norm_L == pytest.approx(0.02, rel=1e-10)
        assert spectral.holomorphy_residual(state.zeta) == 0


def test_initial_data_flat_and_steep():
    grid = Grid(64)
    assert make_initial_data(InitialProfile(), 0.0, grid).zt.max_abs() == 0
    with pytest.raises(SteepnessError):
        make_initial_data(InitialProfile(k0=1), 20.0, grid)
    with pytest.raises(ValueError):
        make_initial_data(InitialProfile(k0=40), 0.01, grid)


def _l0_pairs(state):
    """(scale-invariant pair, pair one derivative above scaling) of L(0)."""
    inv = 1.0 / (1.0 + spectral.derivative(state.zeta))
    dzb = spectral.derivative(state.zt.conj())
    return (
        norm(inv, "Hhalf") + norm(dzb),
        norm(spectral.derivative(inv), "Hhalf") + norm(spectral.derivative(dzb)),
    )


def test_initial_data_balances_the_pairs():
    # wavenumbers 1/2 and 3/2 on the long period
    state = make_initial_data(InitialProfile("custom", coeffs=(1.0, 0.0, 0.3)), 0.02, Grid(64, 4 * math.pi))
    low, high = _l0_pairs(state)
    assert low == pytest.approx(0.01, rel=1e-8)
    assert high == pytest.approx(0.01, rel=1e-8)


@pytest.mark.parametrize("k0, L, ratio", [(1, 2 * math.pi, 1.0), (2, 2 * math.pi, 2.0), (1, 4 * math.pi, 0.5)])
def test_single_wavenumber_pairs_are_proportional(k0, L, ratio):
    state = make_initial_data(InitialProfile(k0=k0), 0.02, Grid(64, L))
    low, high = _l0_pairs(state)
    assert low + high == pytest.approx(0.02, rel=1e-10)
    assert high == pytest.approx(ratio * low, rel=1e-8)


def test_tiling_keeps_pointwise_values(state):
    tiled = tile_state(state, 2)
    assert tiled.grid.N == 2 * state.grid.N
    assert tiled.grid.L == pytest.approx(2 * state.grid.L)
    np.testing.assert_allclose(compute_aux(tiled).b.values[: state.grid.N], compute_aux(state).b.values, atol=1e-12)


def test_rescaled_state_solves_the_rescaled_problem(state):
    lam = 2.0
    dt = 0.25 * max_stable_dt(state)
    evolved = step(step(state, dt), dt)
    scaled = rescale_state(state, lam)
    scaled_dt = dt / math.sqrt(lam)
    scaled_evolved = step(step(scaled, scaled_dt, cfl=1.0), scaled_dt, cfl=1.0)
    expected = rescale_state(evolved, lam)
    assert (scaled_evolved.zt - expected.zt).max_abs() < 1e-8
    assert (scaled_evolved.zeta - expected.zeta).max_abs() < 1e-8


def test_smooth_filter_step(state):
    grid = state.grid.with_filter(FilterRule("smooth36"))
    filtered = WaveState(0.0, SpectralField(grid, state.zeta.values), SpectralField(grid, state.zt.values))
    out = step(filtered, 1e-3)
    np.testing.assert_allclose(out.zt.values, step(state, 1e-3).zt.values, atol=1e-8)


def test_chord_arc_failure_is_a_blow_up(grid):
    zeta = SpectralField.from_coeffs(grid, np.where(np.arange(grid.N) == grid.N - 1, 1j * 0.9999999, 0))
    with pytest.raises(BlowUpError):
        step(WaveState(0.0, zeta, SpectralField.zeros(grid)), 1e-3)
