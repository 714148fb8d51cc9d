from typing import Literal

import numpy as np

from riemannwave.numerics.spectral import Grid, SpectralField


def random_field(
    grid: Grid,
    rng: np.random.Generator,
    bandwidth: int = 8,
    side: Literal["both", "holo", "anti"] = "both",
    mean_zero: bool = True,
    decay: float = 0.5,
) -> SpectralField:
    """Band-limited complex field with geometrically decaying random modes |n| <= bandwidth."""
    bandwidth = min(bandwidth, grid.N // 4)
    c = np.zeros(grid.N, dtype=complex)
    n = np.arange(1, bandwidth + 1)
    amplitude = decay ** (n - 1)
    if side in ("both", "holo"):
        c[-n] = amplitude * (rng.standard_normal(bandwidth) + 1j * rng.standard_normal(bandwidth))
    if side in ("both", "anti"):
        c[n] = amplitude * (rng.standard_normal(bandwidth) + 1j * rng.standard_normal(bandwidth))
    if not mean_zero:
        c[0] = rng.standard_normal() + 1j * rng.standard_normal()
    return SpectralField.from_coeffs(grid, c)


def random_real_field(grid: Grid, rng: np.random.Generator, bandwidth: int = 8) -> SpectralField:
    f = random_field(grid, rng, bandwidth)
    return f.real


def random_state(grid: Grid, rng: np.random.Generator, steepness: float = 0.2, amplitude: float = 0.1, bandwidth: int = 4):
    """Admissible state with 1/Z_a - 1 and Zbar_t exactly holomorphic.

    ``steepness`` is max|1/Z_a - 1| on the grid and ``amplitude`` is max|Z_t|.
    """
    from riemannwave.numerics import spectral
    from riemannwave.numerics.evolution import WaveState

    w = random_field(grid, rng, bandwidth, side="holo")
    w = w * (steepness / w.max_abs())
    zeta = spectral.project(spectral.antiderivative(1.0 / (1.0 + w) - 1.0, strict=False), "holo")
    v = random_field(grid, rng, bandwidth, side="holo")
    zt = (v * (amplitude / v.max_abs())).conj()
    return WaveState(0.0, zeta, zt)
