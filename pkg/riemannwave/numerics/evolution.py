"""Conformal (Riemann-variable) water waves on the torus.

Prognostic fields are zeta = Z - alpha and Z_t; gravity and density are 1.

    A_1  = 1 - Im [Z_t, H] d Zbar_t
    b    = Re (I - H)(Z_t / Z_a)
    Z_tt = -i + i A_1 / Zbar_a
    d_t zeta = Z_t - b Z_a,   d_t Z_t = Z_tt - b d Z_t
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

import numpy as np

from riemannwave.core.config import settings
from riemannwave.core.exceptions import BlowUpError, ChordArcError, SteepnessError, TimeStepError
from riemannwave.numerics import spectral
from riemannwave.numerics.calculus import bracket, commutator_hilbert
from riemannwave.numerics.spectral import Grid, SpectralField, holomorphy_residual, norm
from riemannwave.schemas.report import ResidualRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WaveState:
    t: float
    zeta: SpectralField
    zt: SpectralField

    @property
    def grid(self) -> Grid:
        return self.zeta.grid

    @classmethod
    def flat(cls, grid: Grid, t: float = 0.0) -> "WaveState":
        return cls(t, SpectralField.zeros(grid), SpectralField.zeros(grid))

    def __repr__(self) -> str:
        return f"WaveState(t={self.t:.6g}, N={self.grid.N}, max|Z_t|={self.zt.max_abs():.3e})"


@dataclass(frozen=True, eq=False)
class AuxFields:
    a1: SpectralField
    b: SpectralField
    ztt: SpectralField
    za: SpectralField
    inv_za: SpectralField
    a1_imag_residue: float


def compute_aux(state: WaveState, chord_arc_threshold: float | None = None) -> AuxFields:
    threshold = settings.chord_arc_threshold if chord_arc_threshold is None else chord_arc_threshold
    za = 1.0 + spectral.derivative(state.zeta)
    min_za = float(np.min(np.abs(za.values)))
    if min_za < threshold:
        raise ChordArcError(f"min|Z_a|={min_za:.3e} at t={state.t:.6g}")
    inv_za = 1.0 / za

    # 2i Im([Z_t, H] d Zbar_t) is the symmetric bracket [Z_t, Zbar_t; 1]
    a1_c = 1.0 - bracket(state.zt, state.zt.conj()) / 2j
    a1_imag_residue = float(np.max(np.abs(a1_c.values.imag)))
    a1 = a1_c.real

    u = state.zt * inv_za
    b = (u - spectral.hilbert(u)).real
    ztt = 1j * a1 * inv_za.conj() - 1j
    return AuxFields(a1=a1, b=b, ztt=ztt, za=za, inv_za=inv_za, a1_imag_residue=a1_imag_residue)


def a1_commutator_form(state: WaveState) -> SpectralField:
    """A_1 from the one-sided commutator, for cross-checking ``compute_aux``."""
    return 1.0 - commutator_hilbert(state.zt, state.zt.conj(), differentiate=True).imag


def rhs(state: WaveState, aux: AuxFields | None = None) -> tuple[SpectralField, SpectralField]:
    aux = aux or compute_aux(state)
    dzeta = state.zt - aux.b * aux.za
    dzt = aux.ztt - aux.b * spectral.derivative(state.zt)
    return dzeta, dzt


def max_stable_dt(state: WaveState, cfl: float = 0.5, aux: AuxFields | None = None) -> float:
    aux = aux or compute_aux(state)
    speed = max(1.0, aux.b.max_abs(), state.zt.max_abs())
    return cfl * state.grid.spacing / speed


def _finite(state: WaveState) -> bool:
    return bool(np.all(np.isfinite(state.zeta.values)) and np.all(np.isfinite(state.zt.values)))


def _stage(state: WaveState, dt: float, k: tuple[SpectralField, SpectralField]) -> WaveState:
    return WaveState(state.t + dt, state.zeta + dt * k[0], state.zt + dt * k[1])


def step(
    state: WaveState,
    dt: float,
    project_constraints: bool = False,
    cfl: float = 0.5,
    allow_backward: bool = False,
) -> WaveState:
    """One classical RK4 step, filtered once with the grid's dealiasing rule."""
    if dt == 0 or (dt < 0 and not allow_backward):
        raise TimeStepError(f"dt={dt} must be positive")
    try:
        aux = compute_aux(state)
    except ChordArcError as exc:
        raise BlowUpError(state.t, exc.detail) from exc
    bound = max_stable_dt(state, cfl, aux)
    if abs(dt) > bound * (1 + 1e-12):
        raise TimeStepError(f"|dt|={abs(dt):.3e} exceeds CFL bound {bound:.3e}")

    with np.errstate(over="raise", invalid="raise"):
        try:
            k1 = rhs(state, aux)
            k2 = rhs(_stage(state, dt / 2, k1))
            k3 = rhs(_stage(state, dt / 2, k2))
            k4 = rhs(_stage(state, dt, k3))
        except (FloatingPointError, ChordArcError) as exc:
            raise BlowUpError(state.t, str(exc)) from exc

    zeta = state.zeta + (dt / 6) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    zt = state.zt + (dt / 6) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    rule = state.grid.dealias
    zeta, zt = spectral.spectral_filter(zeta, rule), spectral.spectral_filter(zt, rule)
    if project_constraints:
        zeta = spectral.project(zeta, "holo")
        zt = spectral.project(zt.conj(), "holo").conj()

    out = WaveState(state.t + dt, zeta, zt)
    if not _finite(out):
        raise BlowUpError(out.t)
    return out


def simulate(
    state: WaveState,
    dt: float,
    n_steps: int,
    report_every: int = 1,
    project_constraints: bool = False,
    cfl: float = 0.5,
) -> Iterator[tuple[int, WaveState]]:
    """Yield (step index, state) at step 0, every ``report_every`` steps and at the end."""
    yield 0, state
    for n in range(1, n_steps + 1):
        state = step(state, dt, project_constraints=project_constraints, cfl=cfl)
        if n % report_every == 0 or n == n_steps:
            yield n, state


@dataclass(frozen=True)
class InitialProfile:
    kind: Literal["single_mode", "packet", "custom"] = "single_mode"
    k0: int = 1
    k_center: float = 4.0
    width: float = 1.5
    coeffs: Sequence[complex] = ()

    def shape(self, grid: Grid) -> SpectralField:
        """Holomorphic, mean-zero profile built from modes n < 0."""
        c = np.zeros(grid.N, dtype=complex)
        if self.kind == "single_mode":
            if not 1 <= self.k0 < grid.N // 2:
                raise ValueError(f"k0={self.k0} not resolved on N={grid.N}")
            c[-self.k0] = 1.0
        elif self.kind == "packet":
            n = np.arange(1, grid.N // 4)
            c[-n] = np.exp(-0.5 * ((n - self.k_center) / self.width) ** 2)
        elif self.kind == "custom":
            if len(self.coeffs) >= grid.N // 2:
                raise ValueError("too many custom coefficients for the grid")
            for n, value in enumerate(self.coeffs, start=1):
                c[-n] = value
        else:
            raise ValueError(f"unknown profile {self.kind!r}")
        return SpectralField.from_coeffs(grid, c)


def _pair_scales(g: SpectralField, epsilon: float) -> tuple[float, float]:
    """(c1, c2) giving the scale-invariant and above-scaling pairs epsilon / 2 each.

    The pairs are linear in (c1, c2). When that system has no positive solution,
    as for a single wavenumber k where the second pair is |k| times the first,
    each field contributes epsilon / 2 to L(0) instead.
    """
    dg = spectral.derivative(g)
    system = np.array(
        [
            [norm(g, "Hhalf"), norm(dg)],
            [norm(dg, "Hhalf"), norm(spectral.derivative(dg))],
        ]
    )
    if np.linalg.cond(system) < 1e8:
        c1, c2 = np.linalg.solve(system, [epsilon / 2, epsilon / 2])
        if c1 > 0 and c2 > 0:
            return float(c1), float(c2)
    logger.debug("profile cannot balance the L(0) pairs; splitting epsilon per field")
    return epsilon / (2 * system[:, 0].sum()), epsilon / (2 * system[:, 1].sum())


def make_initial_data(profile: InitialProfile, epsilon: float, grid: Grid) -> WaveState:
    """State with 1/Z_a - 1 = c1 g and Zbar_t = c2 g, scaled so that L(0) = epsilon.

    See ``_pair_scales`` for how epsilon is shared between the terms of L(0).
    """
    if epsilon == 0:
        return WaveState.flat(grid)
    g = profile.shape(grid)
    c1, c2 = _pair_scales(g, epsilon)

    w = c1 * g
    steepness = w.max_abs()
    if steepness >= 1:
        raise SteepnessError(f"|1 - 1/Z_a|_inf = {steepness:.4f} >= 1 at epsilon={epsilon}")
    zeta = spectral.project(spectral.antiderivative(1.0 / (1.0 + w) - 1.0, strict=False), "holo")
    zt = (c2 * g).conj()
    logger.debug("initial data epsilon=%.4g c1=%.4e c2=%.4e steepness=%.4e", epsilon, c1, c2, steepness)
    return WaveState(0.0, zeta, zt)


def tile_state(state: WaveState, periods: int) -> WaveState:
    """The same physical data viewed on a torus ``periods`` times longer."""
    if periods == 1:
        return state
    grid = Grid(state.grid.N * periods, state.grid.L * periods, state.grid.dealias)
    return WaveState(
        state.t,
        SpectralField(grid, np.tile(state.zeta.values, periods)),
        SpectralField(grid, np.tile(state.zt.values, periods)),
    )


def rescale_state(state: WaveState, lam: float) -> WaveState:
    """(lam^-1 Z(lam a), lam^-1/2 Z_t(lam a)) at time t / sqrt(lam) on the period L / lam."""
    grid = Grid(state.grid.N, state.grid.L / lam, state.grid.dealias)
    return WaveState(
        state.t / math.sqrt(lam),
        SpectralField(grid, state.zeta.values / lam),
        SpectralField(grid, state.zt.values / math.sqrt(lam)),
    )


def residuals(state: WaveState, aux: AuxFields | None = None) -> ResidualRecord:
    from riemannwave.numerics.energy import norm_L

    aux = aux or compute_aux(state)
    deviation = aux.inv_za - 1.0
    return ResidualRecord(
        holo_zt=holomorphy_residual(state.zt.conj()),
        holo_inv_za=holomorphy_residual(deviation),
        min_a1=float(np.min(aux.a1.values.real)),
        min_abs_za=float(np.min(np.abs(aux.za.values))),
        steepness=deviation.max_abs(),
        norm_L=norm_L(state),
        b_zero_mode=spectral.mean(aux.b).real,
        a1_imag_residue=aux.a1_imag_residue,
    )
