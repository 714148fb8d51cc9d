"""Singular-integral calculus on the torus.

Every form here is the periodic analogue of a principal-value double integral in
which 1/(a-b) is replaced by (pi/L) cot(pi (a-b)/L):

    [f, H] g     = f Hg - H(fg)
    [f, g; h]    = (1/pi i) int (f(a)-f(b)) (g(a)-g(b)) / (a-b)^2 h(b) db
    <f, g, h>    = (1/pi i) int (f(a)-f(b)) (g(a)-g(b)) (h(a)-h(b)) / (a-b)^2 db

The fast path reduces each one to Hilbert commutators. ``oracle_quadrature`` sums
the kernel directly in O(N^2) and is kept independent of the reductions.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Protocol

import numpy as np

from riemannwave.core.config import settings
from riemannwave.core.exceptions import GridMismatchError, KernelSpecError
from riemannwave.numerics import spectral
from riemannwave.numerics.spectral import SpectralField, integral

logger = logging.getLogger(__name__)

PI_I = math.pi * 1j


class Calculus(Protocol):
    """The three linear operators the forms are built from.

    Implemented for plain fields here and for material jets in ``jets``.
    """

    def hilbert(self, f): ...

    def derivative(self, f): ...

    def project(self, f, side: spectral.Side): ...


class SpectralCalculus:
    def hilbert(self, f: SpectralField) -> SpectralField:
        return spectral.hilbert(f)

    def derivative(self, f: SpectralField) -> SpectralField:
        return spectral.derivative(f)

    def project(self, f: SpectralField, side: spectral.Side) -> SpectralField:
        return spectral.project(f, side)


SPECTRAL = SpectralCalculus()


def _same_grid(*fields) -> None:
    grids = {f.grid for f in fields if isinstance(f, SpectralField)}
    if len(grids) > 1:
        raise GridMismatchError()


def commutator_hilbert(f, g, differentiate: bool = False, calc: Calculus = SPECTRAL):
    """[f, H]g, or [f, H]dg when ``differentiate`` is set."""
    if differentiate:
        g = calc.derivative(g)
    return f * calc.hilbert(g) - calc.hilbert(f * g)


def bracket(f, g, h=None, calc: Calculus = SPECTRAL):
    """[f, g; h] by integration by parts in b; h=None means h = 1."""
    _same_grid(f, g, h)
    if h is None:
        return commutator_hilbert(f, g, True, calc) + commutator_hilbert(g, f, True, calc)
    return (
        commutator_hilbert(f, g * h, True, calc)
        + commutator_hilbert(g, f * h, True, calc)
        - commutator_hilbert(f * g, h, True, calc)
    )


def cubic_form(f, g, h, calc: Calculus = SPECTRAL):
    """<f, g, h>; symmetric in its arguments."""
    return h * bracket(f, g, calc=calc) - bracket(f, g, h, calc=calc)


def quartic_pairing(F: SpectralField, f1: SpectralField, f2: SpectralField, f3: SpectralField) -> complex:
    """Double integral of F(a) times three differences over (a-b)^2."""
    _same_grid(F, f1, f2, f3)
    return PI_I * integral(F * cubic_form(f1, f2, f3))


def quartic_4diff(
    w: SpectralField | None,
    f1: SpectralField,
    f2: SpectralField,
    f3: SpectralField,
    f4: SpectralField,
) -> complex:
    """Double integral of w(a) times four differences over (a-b)^2 (w=None is w=1)."""
    _same_grid(w, f1, f2, f3, f4)
    if w is None:
        w = SpectralField.constant(f1.grid, 1.0)
    near = quartic_pairing(w * f4, f1, f2, f3)
    far = PI_I * integral(w * (f3 * bracket(f1, f2, f4) - bracket(f1, f2, f3 * f4)))
    return near - far


@dataclass(frozen=True)
class KernelWeight:
    kind: Literal["none", "alpha_only", "b_symmetric"] = "none"
    field: SpectralField | None = None


@dataclass(frozen=True)
class KernelSpec:
    """Integrand shape for ``oracle_quadrature``.

    ``diff_factors`` enter as f(a)-f(b), ``point_factors`` at a and
    ``source_factors`` at b. The b_symmetric weight is
    b'(a) + b'(b) - 2 (b(a)-b(b)) (pi/L) cot(pi (a-b)/L).
    """

    power: int
    diff_factors: tuple[SpectralField, ...]
    point_factors: tuple[SpectralField, ...] = ()
    source_factors: tuple[SpectralField, ...] = ()
    weight: KernelWeight = field(default_factory=KernelWeight)
    integrate: bool = False

    @property
    def grid(self) -> spectral.Grid:
        fields = self.diff_factors + self.point_factors + self.source_factors
        if self.weight.field is not None:
            fields += (self.weight.field,)
        if not fields:
            raise KernelSpecError("kernel spec without factors")
        _same_grid(*fields)
        return fields[0].grid


def _kernel(power: int, x: np.ndarray, scale: float) -> np.ndarray:
    if power == 1:
        return scale / np.tan(x)
    csc2 = 1.0 / np.sin(x) ** 2
    if power == 2:
        return scale**2 * csc2
    if power == 3:
        return scale**3 * csc2 / np.tan(x)
    raise KernelSpecError(f"unsupported kernel power {power}")


def _diagonal_limit(spec: KernelSpec) -> np.ndarray | float:
    """Value of the integrand at b = a when the diagonal is removable."""
    if len(spec.diff_factors) > spec.power or spec.weight.kind == "b_symmetric":
        return 0.0
    value = np.ones(spec.grid.N, dtype=complex)
    for f in spec.diff_factors:
        value = value * spectral.derivative(f).values
    for f in spec.point_factors + spec.source_factors:
        value = value * f.values
    if spec.weight.kind == "alpha_only":
        value = value * spec.weight.field.values
    return value


def _row_block(spec: KernelSpec, rows: np.ndarray, limit) -> np.ndarray:
    grid = spec.grid
    N = grid.N
    offset = (rows[:, None] - np.arange(N)[None, :]) % N
    diagonal = offset == 0
    x = np.pi * offset / N
    scale = np.pi / grid.L

    integrand = np.ones(offset.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = _kernel(spec.power, x, scale)
        for f in spec.diff_factors:
            integrand *= f.values[rows, None] - f.values[None, :]
        for f in spec.point_factors:
            integrand *= f.values[rows, None]
        for f in spec.source_factors:
            integrand *= f.values[None, :]
        if spec.weight.kind == "alpha_only":
            integrand *= spec.weight.field.values[rows, None]
        elif spec.weight.kind == "b_symmetric":
            b = spec.weight.field
            b_alpha = spectral.derivative(b).values
            integrand *= (
                b_alpha[rows, None]
                + b_alpha[None, :]
                - 2 * (b.values[rows, None] - b.values[None, :]) * scale / np.tan(x)
            )
        integrand *= kernel

    h = grid.spacing
    if len(spec.diff_factors) >= spec.power:
        integrand[diagonal] = (limit[rows] if isinstance(limit, np.ndarray) else limit)
        return h * integrand.sum(axis=1)
    # principal value: odd offsets only
    odd = (offset % 2) == 1
    return 2 * h * np.where(odd, integrand, 0.0).sum(axis=1)


def oracle_quadrature(
    spec: KernelSpec,
    workers: int | None = None,
    block_rows: int | None = None,
) -> SpectralField | complex:
    """Brute-force trapezoid sum over b of the kernel integrand (no 1/(pi i) factor).

    Returns the row integrals as a field, or their integral over a when
    ``spec.integrate`` is set. Row blocks are reduced in a fixed order.
    """
    if len(spec.diff_factors) < spec.power - 1:
        raise KernelSpecError(
            f"power {spec.power} needs {spec.power - 1} diff factors, got {len(spec.diff_factors)}"
        )
    grid = spec.grid
    workers = workers or settings.oracle_workers
    block_rows = block_rows or settings.oracle_block_rows
    limit = _diagonal_limit(spec) if len(spec.diff_factors) >= spec.power else None
    blocks = [np.arange(start, min(start + block_rows, grid.N)) for start in range(0, grid.N, block_rows)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda rows: _row_block(spec, rows, limit), blocks))
    else:
        parts = [_row_block(spec, rows, limit) for rows in blocks]
    rows = np.concatenate(parts)

    if spec.integrate:
        return complex(grid.spacing * rows.sum())
    return SpectralField(grid, rows)


def oracle_hilbert(f: SpectralField) -> SpectralField:
    return oracle_quadrature(KernelSpec(1, (), source_factors=(f,))) / PI_I


def oracle_bracket(f: SpectralField, g: SpectralField, h: SpectralField | None = None) -> SpectralField:
    sources = (h,) if h is not None else ()
    return oracle_quadrature(KernelSpec(2, (f, g), source_factors=sources)) / PI_I


def oracle_cubic(f: SpectralField, g: SpectralField, h: SpectralField) -> SpectralField:
    return oracle_quadrature(KernelSpec(2, (f, g, h))) / PI_I


def oracle_pairing(F: SpectralField, f1: SpectralField, f2: SpectralField, f3: SpectralField) -> complex:
    return oracle_quadrature(KernelSpec(2, (f1, f2, f3), point_factors=(F,), integrate=True))


def oracle_4diff(w: SpectralField | None, *factors: SpectralField) -> complex:
    points = (w,) if w is not None else ()
    return oracle_quadrature(KernelSpec(2, tuple(factors), point_factors=points, integrate=True))


def oracle_weighted_4diff(b: SpectralField, point: SpectralField | None, *factors: SpectralField) -> complex:
    """Double integral with the b_symmetric weight, which has no fast path."""
    points = (point,) if point is not None else ()
    spec = KernelSpec(
        2,
        tuple(factors),
        point_factors=points,
        weight=KernelWeight("b_symmetric", b),
        integrate=True,
    )
    return oracle_quadrature(spec)


def oracle_hhalf(f: SpectralField) -> float:
    value = oracle_quadrature(KernelSpec(2, (f, f.conj()), integrate=True))
    return math.sqrt(max(value.real, 0.0) / (2 * math.pi))
