from itertools import permutations

import numpy as np
import pytest

from riemannwave.core.exceptions import GridMismatchError, KernelSpecError
from riemannwave.numerics import calculus, spectral
from riemannwave.numerics.calculus import KernelSpec
from riemannwave.numerics.spectral import Grid
from riemannwave.utils.sampling import random_field
from tests.conftest import mode


def _close(a, b, rtol):
    scale = max(a.max_abs(), b.max_abs())
    assert (a - b).max_abs() <= rtol * scale


def test_commutator_of_conjugate_modes(grid):
    out = calculus.commutator_hilbert(mode(grid, -1), mode(grid, 1))
    np.testing.assert_allclose(out.values, -1.0, atol=1e-14)


def test_bracket_of_conjugate_modes(grid):
    out = calculus.bracket(mode(grid, -1), mode(grid, 1))
    np.testing.assert_allclose(out.values, -2j, atol=1e-13)


def test_bracket_with_unit_weight_matches_default(grid, rng):
    f, g = random_field(grid, rng), random_field(grid, rng)
    one = spectral.SpectralField.constant(grid, 1.0)
    _close(calculus.bracket(f, g, one), calculus.bracket(f, g), 1e-12)


def test_cubic_form_is_symmetric(grid, rng):
    fields = [random_field(grid, rng) for _ in range(3)]
    reference = calculus.cubic_form(*fields)
    for order in permutations(fields):
        _close(calculus.cubic_form(*order), reference, 1e-11)


def test_hilbert_matches_quadrature(grid, rng):
    f = random_field(grid, rng)
    _close(calculus.oracle_hilbert(f), spectral.hilbert(f), 1e-8)


def test_bracket_matches_quadrature(grid, rng):
    f, g, h = (random_field(grid, rng) for _ in range(3))
    _close(calculus.oracle_bracket(f, g), calculus.bracket(f, g), 1e-8)
    _close(calculus.oracle_bracket(f, g, h), calculus.bracket(f, g, h), 1e-8)


def test_cubic_matches_quadrature(grid, rng):
    f, g, h = (random_field(grid, rng) for _ in range(3))
    _close(calculus.oracle_cubic(f, g, h), calculus.cubic_form(f, g, h), 1e-8)


def test_quartic_forms_match_quadrature(grid, rng):
    w, f1, f2, f3, f4 = (random_field(grid, rng, mean_zero=False) for _ in range(5))
    fast = calculus.quartic_pairing(w, f1, f2, f3)
    np.testing.assert_allclose(calculus.oracle_pairing(w, f1, f2, f3), fast, rtol=1e-8)
    fast4 = calculus.quartic_4diff(w, f1, f2, f3, f4)
    np.testing.assert_allclose(calculus.oracle_4diff(w, f1, f2, f3, f4), fast4, rtol=1e-8)
    np.testing.assert_allclose(
        calculus.oracle_4diff(None, f1, f2, f3, f4), calculus.quartic_4diff(None, f1, f2, f3, f4), rtol=1e-8
    )


def test_hhalf_quadrature(grid, rng):
    f = random_field(grid, rng)
    np.testing.assert_allclose(calculus.oracle_hhalf(f), spectral.norm(f, "Hhalf"), rtol=1e-8)


def test_oracle_is_independent_of_blocking(grid, rng):
    f, g = random_field(grid, rng), random_field(grid, rng)
    spec = KernelSpec(2, (f, g))
    serial = calculus.oracle_quadrature(spec, workers=1, block_rows=16)
    threaded = calculus.oracle_quadrature(spec, workers=4, block_rows=16)
    np.testing.assert_array_equal(serial.values, threaded.values)


def test_oracle_rejects_short_specs(grid, rng):
    f = random_field(grid, rng)
    with pytest.raises(KernelSpecError):
        calculus.oracle_quadrature(KernelSpec(3, (f,)))
    with pytest.raises(KernelSpecError):
        calculus.oracle_quadrature(KernelSpec(4, (f, f, f)))
    with pytest.raises(KernelSpecError):
        calculus.oracle_quadrature(KernelSpec(1, ()))


def test_forms_reject_mixed_grids(rng):
    f = random_field(Grid(32), rng)
    g = random_field(Grid(64), rng)
    with pytest.raises(GridMismatchError):
        calculus.bracket(f, g)
