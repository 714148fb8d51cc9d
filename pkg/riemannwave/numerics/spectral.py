"""Periodic Fourier fields, the Hilbert transform and the holomorphic projections.

Fields live on the torus [0, L). A mode with wavenumber k < 0 is a boundary value
of a function holomorphic in the lower half plane; the zero mode goes with the
holomorphic side and the Nyquist mode counts as negative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.fft

from riemannwave.core.exceptions import GridMismatchError, NonzeroMeanError

Side = Literal["holo", "anti"]
NormKind = Literal["L2", "Linf", "Hhalf", "Hs"]


@dataclass(frozen=True)
class FilterRule:
    kind: Literal["none", "krasny", "smooth36"] = "none"
    threshold: float = 1e-13


NO_FILTER = FilterRule()


@dataclass(frozen=True)
class Grid:
    N: int
    L: float = 2 * math.pi
    dealias: FilterRule = field(default=NO_FILTER, compare=False)

    def __post_init__(self):
        if self.N < 16 or self.N % 2:
            raise ValueError(f"N={self.N}: need an even point count >= 16")
        if not self.L > 0:
            raise ValueError(f"L={self.L}: period must be positive")

    @property
    def spacing(self) -> float:
        return self.L / self.N

    @cached_property
    def points(self) -> np.ndarray:
        return np.arange(self.N) * self.spacing

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        # fftfreq already files the Nyquist index under the negative frequencies
        k = 2 * np.pi * scipy.fft.fftfreq(self.N, d=self.spacing)
        k.setflags(write=False)
        return k

    @property
    def k_max(self) -> float:
        return np.pi * self.N / self.L

    def with_filter(self, rule: FilterRule) -> "Grid":
        return Grid(self.N, self.L, rule)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex samples on a grid with their (lazily computed) Fourier coefficients.

    ``coeffs[n]`` is normalized so that ``values = sum_n coeffs[n] exp(i k_n alpha)``.
    """

    grid: Grid
    values: np.ndarray

    __array_ufunc__ = None

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.grid.N,):
            raise GridMismatchError(f"expected {self.grid.N} samples, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs: np.ndarray) -> "SpectralField":
        out = cls(grid, scipy.fft.ifft(np.asarray(coeffs, dtype=complex) * grid.N))
        out.__dict__["coeffs"] = _frozen(np.array(coeffs, dtype=complex))
        return out

    @classmethod
    def constant(cls, grid: Grid, value: complex) -> "SpectralField":
        return cls(grid, np.full(grid.N, value, dtype=complex))

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls.constant(grid, 0.0)

    @cached_property
    def coeffs(self) -> np.ndarray:
        return _frozen(scipy.fft.fft(self.values) / self.grid.N)

    @property
    def real(self) -> "SpectralField":
        return SpectralField(self.grid, self.values.real)

    @property
    def imag(self) -> "SpectralField":
        return SpectralField(self.grid, self.values.imag)

    def conj(self) -> "SpectralField":
        return SpectralField(self.grid, self.values.conj())

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _other(self, other) -> np.ndarray | complex:
        if isinstance(other, SpectralField):
            if other.grid != self.grid:
                raise GridMismatchError()
            return other.values
        if np.isscalar(other):
            return other
        return NotImplemented

    def __add__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return SpectralField(self.grid, self.values + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return SpectralField(self.grid, self.values - v)

    def __rsub__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return SpectralField(self.grid, v - self.values)

    def __mul__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        out = SpectralField(self.grid, self.values * v)
        if isinstance(other, SpectralField) and self.grid.dealias.kind != "none":
            out = spectral_filter(out, self.grid.dealias)
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        out = SpectralField(self.grid, self.values / v)
        if isinstance(other, SpectralField) and self.grid.dealias.kind != "none":
            out = spectral_filter(out, self.grid.dealias)
        return out

    def __rtruediv__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return SpectralField(self.grid, v / self.values)

    def __neg__(self):
        return SpectralField(self.grid, -self.values)

    def __pow__(self, power: int):
        out = SpectralField(self.grid, self.values**power)
        if power != 1 and self.grid.dealias.kind != "none":
            out = spectral_filter(out, self.grid.dealias)
        return out

    def __repr__(self) -> str:
        return f"SpectralField(N={self.grid.N}, L={self.grid.L:.6g}, max|f|={self.max_abs():.3e})"


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _multiply(f: SpectralField, multiplier: np.ndarray) -> SpectralField:
    return SpectralField.from_coeffs(f.grid, f.coeffs * multiplier)


def _hilbert_multiplier(grid: Grid) -> np.ndarray:
    return -np.sign(grid.wavenumbers)


def hilbert(f: SpectralField) -> SpectralField:
    """Conjugate-function Hilbert transform for the lower half plane, -sgn(k) per mode."""
    return _multiply(f, _hilbert_multiplier(f.grid))


def projection_mask(grid: Grid, side: Side) -> np.ndarray:
    k = grid.wavenumbers
    if side == "holo":
        return (k <= 0).astype(float)
    if side == "anti":
        return (k > 0).astype(float)
    raise ValueError(f"unknown side {side!r}")


def project(f: SpectralField, side: Side) -> SpectralField:
    return _multiply(f, projection_mask(f.grid, side))


def derivative(f: SpectralField) -> SpectralField:
    return _multiply(f, 1j * f.grid.wavenumbers)


def antiderivative(f: SpectralField, strict: bool = True) -> SpectralField:
    """Mean-zero primitive of f; with ``strict`` a nonzero mean raises."""
    c = f.coeffs
    if strict and abs(c[0]) > 1e-11 * max(1.0, float(np.max(np.abs(c)))):
        raise NonzeroMeanError(f"nonzero mean {c[0]:.3e}")
    k = f.grid.wavenumbers
    multiplier = np.zeros_like(c)
    nonzero = k != 0
    multiplier[nonzero] = 1.0 / (1j * k[nonzero])
    return _multiply(f, multiplier)


def mean(f: SpectralField) -> complex:
    return complex(f.coeffs[0])


def integral(f: SpectralField) -> complex:
    return f.grid.L * complex(f.coeffs[0])


def inner(f: SpectralField, g: SpectralField) -> complex:
    """Integral of f times conj(g) over one period."""
    if f.grid != g.grid:
        raise GridMismatchError()
    return f.grid.L * complex(np.sum(f.coeffs * np.conj(g.coeffs)))


def norm(f: SpectralField, kind: NormKind = "L2", s: float = 0.0) -> float:
    """L2, Linf, homogeneous H^{1/2} or homogeneous H^s norm.

    The H^{1/2} normalization matches (1/2pi) of the double integral of
    |f(a)-f(b)|^2 against the periodic squared cot kernel.
    """
    if kind == "Linf":
        return f.max_abs()
    power = np.abs(f.coeffs) ** 2
    k = np.abs(f.grid.wavenumbers)
    if kind == "L2":
        weight = 1.0
    elif kind == "Hhalf":
        weight = k
    elif kind == "Hs":
        if not 0 <= s <= 4:
            raise ValueError(f"s={s} outside [0, 4]")
        weight = k ** (2 * s)
    else:
        raise ValueError(f"unknown norm {kind!r}")
    return math.sqrt(f.grid.L * float(np.sum(weight * power)))


def spectral_filter(f: SpectralField, rule: FilterRule) -> SpectralField:
    if rule.kind == "none":
        return f
    c = f.coeffs
    if rule.kind == "krasny":
        out = SpectralField.from_coeffs(f.grid, np.where(np.abs(c) < rule.threshold, 0.0, c))
    elif rule.kind == "smooth36":
        ratio = np.abs(f.grid.wavenumbers) / f.grid.k_max
        out = _multiply(f, np.exp(-36.0 * ratio**36))
    else:
        raise ValueError(f"unknown filter {rule.kind!r}")
    return out


def holomorphy_residual(f: SpectralField) -> float:
    """L2 size of the antiholomorphic part, zero for exact boundary values."""
    return norm(project(f, "anti"))
