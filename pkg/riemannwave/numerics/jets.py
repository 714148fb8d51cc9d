"""Material jets: a field together with D_t f, D_t^2 f, ... at one time slice.

D_t = d/dt + b d/da. Nothing here differences in time; every component follows
from the evolution equations through

    D_t d f  = d D_t f - b_a d f
    D_t M f  = M f_t + b d M f,  f_t = D_t f - b d f

for Fourier multipliers M (H, P_H, P_A, d^-1), the same as M D_t f + [b, M] d f,
plus the Leibniz rule for products.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import TYPE_CHECKING, Callable, Literal

import numpy as np

from riemannwave.core.config import settings
from riemannwave.core.exceptions import ChordArcError, GridMismatchError, JetOrderError
from riemannwave.numerics import spectral
from riemannwave.numerics.calculus import commutator_hilbert
from riemannwave.numerics.spectral import Grid, SpectralField

if TYPE_CHECKING:
    from riemannwave.numerics.evolution import WaveState

logger = logging.getLogger(__name__)

MAX_ORDER = 6


@dataclass(frozen=True, eq=False)
class MaterialJet:
    components: tuple[SpectralField, ...]

    __array_ufunc__ = None

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise JetOrderError("empty jet")
        if len({c.grid for c in components}) > 1:
            raise GridMismatchError()
        object.__setattr__(self, "components", components)

    @property
    def order(self) -> int:
        return len(self.components) - 1

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def __getitem__(self, k: int) -> SpectralField:
        if k > self.order:
            raise JetOrderError(f"component {k} requested from a jet of order {self.order}")
        return self.components[k]

    def __len__(self) -> int:
        return len(self.components)

    @classmethod
    def constant(cls, grid: Grid, value: complex, order: int) -> "MaterialJet":
        return cls.static(SpectralField.constant(grid, value), order)

    @classmethod
    def static(cls, f: SpectralField, order: int) -> "MaterialJet":
        """Jet of a field with vanishing material derivatives."""
        zero = SpectralField.zeros(f.grid)
        return cls((f,) + (zero,) * order)

    def truncate(self, order: int) -> "MaterialJet":
        if order > self.order:
            raise JetOrderError(f"cannot raise order {self.order} to {order}")
        return MaterialJet(self.components[: order + 1])

    def shift(self) -> "MaterialJet":
        """Jet of D_t f, one order lower."""
        if self.order == 0:
            raise JetOrderError("cannot shift an order-0 jet")
        return MaterialJet(self.components[1:])

    def conj(self) -> "MaterialJet":
        return MaterialJet(tuple(c.conj() for c in self.components))

    @property
    def real(self) -> "MaterialJet":
        return MaterialJet(tuple(c.real for c in self.components))

    @property
    def imag(self) -> "MaterialJet":
        return MaterialJet(tuple(c.imag for c in self.components))

    @cached_property
    def self_gradient(self) -> "MaterialJet":
        """Jet of d_a f when f is itself the advecting velocity b."""
        return _advected_derivative(self, None)

    def _check(self, other: "MaterialJet") -> None:
        if other.order != self.order:
            raise JetOrderError(f"order mismatch {self.order} vs {other.order}")

    def __add__(self, other):
        if isinstance(other, MaterialJet):
            self._check(other)
            return MaterialJet(tuple(a + b for a, b in zip(self.components, other.components)))
        if np.isscalar(other):
            return MaterialJet((self.components[0] + other,) + self.components[1:])
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return MaterialJet(tuple(-c for c in self.components))

    def __sub__(self, other):
        if isinstance(other, MaterialJet) or np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, MaterialJet):
            return jet_product(self, other)
        if np.isscalar(other):
            return MaterialJet(tuple(c * other for c in self.components))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MaterialJet):
            return jet_product(self, jet_reciprocal(other))
        if np.isscalar(other):
            return MaterialJet(tuple(c / other for c in self.components))
        return NotImplemented

    def __rtruediv__(self, other):
        if np.isscalar(other):
            return jet_reciprocal(self) * other
        return NotImplemented

    def __repr__(self) -> str:
        return f"MaterialJet(order={self.order}, N={self.grid.N})"


def _prepend(head: SpectralField, tail: MaterialJet | None) -> MaterialJet:
    return MaterialJet((head,) + (tail.components if tail is not None else ()))


def jet_product(a: MaterialJet, b: MaterialJet) -> MaterialJet:
    if a.order != b.order:
        raise JetOrderError(f"order mismatch {a.order} vs {b.order}")
    out = []
    for k in range(a.order + 1):
        acc = a[0] * b[k]
        for i in range(1, k + 1):
            acc = acc + comb(k, i) * (a[i] * b[k - i])
        out.append(acc)
    return MaterialJet(tuple(out))


def jet_reciprocal(a: MaterialJet) -> MaterialJet:
    r0 = 1.0 / a[0]
    out = [r0]
    for k in range(1, a.order + 1):
        acc = SpectralField.zeros(a.grid)
        for i in range(k):
            acc = acc + comb(k, i) * (out[i] * a[k - i])
        out.append(-(r0 * acc))
    return MaterialJet(tuple(out))


def _advected_derivative(a: MaterialJet, bx: MaterialJet | None) -> MaterialJet:
    # table[m][k] = D_t^k d D_t^m f, filled by increasing k
    J = a.order
    table = [[spectral.derivative(a[m])] for m in range(J + 1)]
    for k in range(J):
        for m in range(J - k):
            acc = table[m + 1][k]
            for i in range(k + 1):
                grad = bx[i] if bx is not None else table[0][i]
                acc = acc - comb(k, i) * (grad * table[m][k - i])
            table[m].append(acc)
    return MaterialJet(tuple(table[0]))


def jet_derivative(a: MaterialJet, b_jet: MaterialJet | None) -> MaterialJet:
    """Jet of d_a f from the jet of f; ``b_jet`` may be None only for order 0."""
    if a.order == 0:
        return MaterialJet((spectral.derivative(a[0]),))
    if b_jet is None or b_jet.order < a.order - 1:
        have = -1 if b_jet is None else b_jet.order
        raise JetOrderError(f"b jet of order {have} cannot advect a jet of order {a.order}")
    return _advected_derivative(a, b_jet.self_gradient)


def jet_multiplier(
    a: MaterialJet,
    b_jet: MaterialJet | None,
    op: Callable[[SpectralField], SpectralField],
) -> MaterialJet:
    """Jet of M f for a Fourier multiplier M commuting with d/dt."""
    J = a.order
    if J > 0 and (b_jet is None or b_jet.order < J - 1):
        raise JetOrderError(f"b jet too short for a multiplier of order {J}")

    # partials[k] is the jet of d^k f / dt^k, order J - k
    partials = [a]
    for k in range(J):
        prev = partials[k]
        b = b_jet.truncate(prev.order - 1)
        partials.append(prev.shift() - b * jet_derivative(prev, b_jet).truncate(prev.order - 1))

    memo: dict[tuple[int, int], MaterialJet] = {}

    def image(k: int, m: int) -> MaterialJet:
        if (k, m) in memo:
            return memo[(k, m)]
        head = op(partials[k][0])
        if m == 0:
            out = MaterialJet((head,))
        else:
            lower = image(k, m - 1)
            b = b_jet.truncate(m - 1)
            out = _prepend(head, image(k + 1, m - 1) + b * jet_derivative(lower, b_jet))
        memo[(k, m)] = out
        return out

    return image(0, J)


def jet_hilbert(
    a: MaterialJet,
    b_jet: MaterialJet | None,
    side: Literal["H", "holo", "anti"] = "H",
) -> MaterialJet:
    if side == "H":
        return jet_multiplier(a, b_jet, spectral.hilbert)
    return jet_multiplier(a, b_jet, lambda f: spectral.project(f, side))


def jet_antiderivative(a: MaterialJet, b_jet: MaterialJet | None) -> MaterialJet:
    return jet_multiplier(a, b_jet, lambda f: spectral.antiderivative(f, strict=False))


class JetCalculus:
    """Evaluates the calculus forms on jets advected by ``b_jet``."""

    def __init__(self, b_jet: MaterialJet | None):
        self.b_jet = b_jet

    def hilbert(self, f: MaterialJet) -> MaterialJet:
        return jet_hilbert(f, self.b_jet, "H")

    def derivative(self, f: MaterialJet) -> MaterialJet:
        return jet_derivative(f, self.b_jet)

    def project(self, f: MaterialJet, side) -> MaterialJet:
        return jet_hilbert(f, self.b_jet, side)


@dataclass(frozen=True, eq=False)
class BaseJets:
    """Jets of the primitive quantities at one time slice, all of one order."""

    zeta: MaterialJet
    zt: MaterialJet
    za: MaterialJet
    inv_za: MaterialJet
    b: MaterialJet
    a1: MaterialJet
    ztt: MaterialJet
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return self.zt.order

    @property
    def grid(self) -> Grid:
        return self.zt.grid

    @cached_property
    def zt_bar(self) -> MaterialJet:
        return self.zt.conj()

    @cached_property
    def calc(self) -> JetCalculus:
        return JetCalculus(self.b)

    def derivative(self, f: MaterialJet) -> MaterialJet:
        return jet_derivative(f, self.b)


def _aux_jets(zeta: MaterialJet, zt: MaterialJet, b_prev: MaterialJet | None):
    calc = JetCalculus(b_prev)
    za = jet_derivative(zeta, b_prev) + 1.0
    inv_za = jet_reciprocal(za)
    a1 = 1.0 - commutator_hilbert(zt, zt.conj(), True, calc).imag
    u = zt * inv_za
    b = (u - calc.hilbert(u)).real
    ztt = 1j * (a1 * inv_za.conj()) - 1j
    return za, inv_za, a1, b, ztt


def build_base_jets(state: "WaveState", order: int, chord_arc_threshold: float | None = None) -> BaseJets:
    """Bootstrap all base jets to ``order`` by induction.

    Order n of (Z - a, Z_t) gives order n of Z_a, 1/Z_a, A_1, b and Z_tt; then
    D_t^{n+1} Z_t = D_t^n Z_tt and D_t^{n+1}(Z - a) = D_t^n (Z_t - b).
    """
    if not 0 <= order <= MAX_ORDER:
        raise JetOrderError(f"jet order {order} outside [0, {MAX_ORDER}]")
    threshold = settings.chord_arc_threshold if chord_arc_threshold is None else chord_arc_threshold
    min_za = float(np.min(np.abs(1.0 + spectral.derivative(state.zeta).values)))
    if min_za < threshold:
        raise ChordArcError(f"min|Z_a|={min_za:.3e} at t={state.t:.6g}")

    zeta = MaterialJet((state.zeta,))
    zt = MaterialJet((state.zt,))
    b_prev = None
    for n in range(order + 1):
        za, inv_za, a1, b, ztt = _aux_jets(zeta, zt, b_prev)
        if n == order:
            break
        zeta = MaterialJet(zeta.components + ((zt - b)[n],))
        zt = MaterialJet(zt.components + (ztt[n],))
        b_prev = b

    logger.debug("base jets order=%d min_za=%.6g b_mean=%.3e", order, min_za, spectral.mean(b[0]).real)
    return BaseJets(zeta=zeta, zt=zt, za=za, inv_za=inv_za, b=b, a1=a1, ztt=ztt)
