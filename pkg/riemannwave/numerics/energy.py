"""Energy hierarchy on one time slice.

Theta^(0) = Q = d^-1(Zbar_t Z_a) and Theta^(j) = (P_H D_t)^j Q. From them

    E_j  = Re( int i dTheta^(j+1) conj Theta^(j+1) - int i dTheta^(j) conj Theta^(j+2) )
    frak = E_j - Re( int i dTheta^(j) conj(P_H G^(j)) + C1_j + C2_j )
    cal  = frak - Re F_j + Re D_j - H_j

Double integrals are written with theta = Zbar_t(a) - Zbar_t(b), where the material
derivative of a difference raises the jet index of each of its factors. Every
theta-type factor is keyed by (n, conjugated).
"""
from __future__ import annotations

import logging
import math
from math import factorial
from typing import Sequence

import numpy as np

from riemannwave.core.exceptions import JetOrderError
from riemannwave.numerics import spectral
from riemannwave.numerics.calculus import (
    PI_I,
    cubic_form,
    oracle_weighted_4diff,
    quartic_4diff,
)
from riemannwave.numerics.evolution import WaveState, compute_aux, residuals
from riemannwave.numerics.jets import BaseJets, MaterialJet, build_base_jets, jet_antiderivative, jet_hilbert
from riemannwave.numerics.spectral import SpectralField, inner, integral, norm
from riemannwave.schemas.report import EnergyLevel, EnergyReport
from riemannwave.utils.stencils import time_derivative

logger = logging.getLogger(__name__)

Key = tuple[int, bool]

__all__ = [
    "theta",
    "phg",
    "phg_direct",
    "energy_quadratic",
    "corrections",
    "energy_frak",
    "energy_cal",
    "frak_e0_rhs",
    "frak_e0_explicit",
    "norm_L",
    "energy_proxies",
    "energy_identity_sides",
    "energy_report",
    "time_derivative",
]


def _jets(state: WaveState | None, jets: BaseJets | None, need: int) -> BaseJets:
    if jets is None:
        if state is None:
            raise ValueError("need a state or prebuilt jets")
        return build_base_jets(state, need)
    if jets.order < need:
        raise JetOrderError(f"need jets of order {need}, have {jets.order}")
    return jets


def _cached(jets: BaseJets, key, build):
    if key not in jets.cache:
        jets.cache[key] = build()
    return jets.cache[key]


def q_jet(jets: BaseJets) -> MaterialJet:
    return _cached(jets, "Q", lambda: jet_antiderivative(jets.zt_bar * jets.za, jets.b))


def theta_jet(jets: BaseJets, j: int) -> MaterialJet:
    """Jet of Theta^(j), of order ``jets.order - j``."""
    if j > jets.order:
        raise JetOrderError(f"Theta^({j}) needs jets of order >= {j}, have {jets.order}")
    if j == 0:
        return q_jet(jets)
    return _cached(jets, ("theta", j), lambda: jet_hilbert(theta_jet(jets, j - 1).shift(), jets.b, "holo"))


def theta(state: WaveState | None, jets: BaseJets | None, j: int) -> SpectralField:
    return theta_jet(_jets(state, jets, j), j)[0]


def _d_alpha(jets: BaseJets, f: MaterialJet) -> MaterialJet:
    return jets.inv_za.truncate(f.order) * jets.derivative(f)


def _phg_block(jets: BaseJets, m: int, order: int) -> MaterialJet:
    """Jet of 1/2 P_H{ 1/Zbar_a (<Zbar_t, i/Zbar_a, D_a Theta^(m)> + <-i/Z_a, Z_t, D_a Theta^(m)>) }."""

    def build():
        calc = jets.calc
        inv = jets.inv_za.truncate(order)
        inv_bar = inv.conj()
        dtheta = _d_alpha(jets, theta_jet(jets, m).truncate(order))
        forms = cubic_form(jets.zt_bar.truncate(order), 1j * inv_bar, dtheta, calc) + cubic_form(
            -1j * inv, jets.zt.truncate(order), dtheta, calc
        )
        return 0.5 * calc.project(inv_bar * forms, "holo")

    return _cached(jets, ("phg_block", m, order), build)


def phg(state: WaveState | None, jets: BaseJets | None, j: int) -> SpectralField:
    """P_H G^(j) as the sum over l of (P_H D_t)^l applied to the block at index j-l-1."""
    jets = _jets(state, jets, max(j - 1, 0))
    if j == 0:
        return SpectralField.zeros(jets.grid)

    def build():
        total = SpectralField.zeros(jets.grid)
        for l in range(j):
            x = _phg_block(jets, j - l - 1, l)
            for _ in range(l):
                x = jet_hilbert(x.shift(), jets.b, "holo")
            total = total + x[0]
        return total

    return _cached(jets, ("phg", j), build)


def phg_direct(state: WaveState | None, jets: BaseJets | None, j: int) -> SpectralField:
    """P_H(D_t P_H D_t Theta^(j) + i |Z_a|^-2 d Theta^(j)) straight from the jets."""
    jets = _jets(state, jets, j + 2)
    inv = jets.inv_za[0]
    g = theta_jet(jets, j + 1)[1] + 1j * (inv * inv.conj()) * spectral.derivative(theta_jet(jets, j)[0])
    return spectral.project(g, "holo")


def _level_thetas(jets: BaseJets, j: int) -> list[SpectralField]:
    return [theta_jet(jets, j + i)[0] for i in range(3)]


def energy_quadratic(state: WaveState | None, jets: BaseJets | None, j: int) -> tuple[float, float, float]:
    """E_j with its decomposition through D_a Theta^(j) and P_H G^(j).

    Returns (E_j, decomposition, imaginary residue of the unrealed integral).
    """
    jets = _jets(state, jets, j + 2)
    th = _level_thetas(jets, j)
    d = [spectral.derivative(x) for x in th]
    head = inner(1j * d[1], th[1])
    value = head - inner(1j * d[0], th[2])
    d_alpha = jets.inv_za[0] * d[0]
    decomposition = head + inner(d_alpha, d_alpha) + integral(1j * d[0].conj() * phg(None, jets, j))
    return value.real, decomposition.real, abs(value.imag)


class _DifferenceForms:
    """Quartic double integrals whose three difference factors come from the Z_t jet."""

    def __init__(self, jets: BaseJets):
        self.jets = jets
        self._cubic = jets.cache.setdefault("cubic", {})
        self._weighted = jets.cache.setdefault("weighted", {})

    def factor(self, key: Key) -> SpectralField:
        n, conjugated = key
        return self.jets.zt[n] if conjugated else self.jets.zt_bar[n]

    def cubic(self, keys: Sequence[Key]) -> SpectralField:
        ordered = tuple(sorted(keys))
        if ordered not in self._cubic:
            self._cubic[ordered] = cubic_form(*(self.factor(k) for k in ordered))
        return self._cubic[ordered]

    def weighted(self, j: int, keys: Sequence[Key]) -> complex:
        ordered = tuple(sorted(keys))
        if (j, ordered) not in self._weighted:
            self._weighted[(j, ordered)] = oracle_weighted_4diff(
                self.jets.b[0], self.jets.zt[j], *(self.factor(k) for k in ordered)
            )
        return self._weighted[(j, ordered)]

    @staticmethod
    def _raised(m: int, keys: Sequence[Key]):
        # multinomial expansion of the m-th material derivative of a triple product
        for a in range(m + 1):
            for b in range(m - a + 1):
                c = m - a - b
                coeff = factorial(m) // (factorial(a) * factorial(b) * factorial(c))
                raised = tuple((n + s, bar) for (n, bar), s in zip(keys, (a, b, c)))
                yield coeff, raised

    def expanded(self, point: SpectralField, m: int, keys: Sequence[Key]) -> complex:
        return sum(
            (coeff * PI_I * integral(point * self.cubic(raised)) for coeff, raised in self._raised(m, keys)),
            0j,
        )

    def expanded_weighted(self, j: int, m: int, keys: Sequence[Key]) -> complex:
        return sum((coeff * self.weighted(j, raised) for coeff, raised in self._raised(m, keys)), 0j)

    def transport(self, j: int, m: int, keys: Sequence[Key]) -> complex:
        """Double integral of (D_t^j Z_t Dt - D_t^(j+1) Z_t) applied to the m-th derivative."""
        zt = self.jets.zt
        return self.expanded(zt[j], m + 1, keys) - self.expanded(zt[j + 1], m, keys)

    def symmetric_transport(self, keys: Sequence[Key]) -> complex:
        """(theta Dt - Dt theta) with theta itself a difference, via 2 x its a-point value."""
        zb = self.jets.zt_bar
        return 2 * self.expanded(zb[0], 1, keys) - 2 * self.expanded(zb[1], 0, keys)


def _c1(forms: _DifferenceForms, j: int) -> complex:
    s1 = sum(
        (forms.transport(j, l - k, [(k, False), (0, True), (j - l - 1, False)]) for l in range(j) for k in range(l + 1)),
        0j,
    )
    s2 = s3 = 0j
    for l in range(j - 1):
        for k in range(j - l - 1):
            sign = (-1) ** k
            s2 += sign * forms.transport(j, 0, [(1 + l, False), (k, True), (j - l - 2 - k, False)])
            s3 += sign * forms.symmetric_transport([(j - l - 1, True), (j - k - 1, False), (k + l + 1, True)])
    s4 = sum(
        (forms.expanded(forms.jets.zt[j], 0, [(j - l - 1, False), (0, True), (1 + l, False)]) for l in range(j)),
        0j,
    )
    return s1 / (2 * math.pi) + s2 / (4 * math.pi) - s3 / (8 * math.pi) + s4 / (2 * math.pi)


def _c2(forms: _DifferenceForms, j: int) -> complex:
    t1 = sum(
        ((-1) ** k * forms.transport(j, 0, [(0, False), (k, True), (j - k - 1, False)]) for k in range(j)),
        0j,
    )
    t2 = (-1) ** j * forms.expanded(forms.jets.zt[j], 0, [(0, False), (j, True), (0, False)])
    return (t1 + t2) / (4 * math.pi)


def _f(forms: _DifferenceForms, j: int) -> complex:
    jets = forms.jets
    inv = jets.inv_za[0]
    quasi = jets.zt_bar[j + 1] + 1j * jets.a1[0] * (inv * inv.conj()) * spectral.derivative(jets.zt_bar[j - 1])
    point = quasi.conj()

    def term(m: int, keys: Sequence[Key]) -> complex:
        return forms.expanded(point, m, keys) + forms.expanded_weighted(j, m, keys)

    first = sum((term(l - k, [(k, False), (0, True), (j - l - 1, False)]) for l in range(j) for k in range(l + 1)), 0j)
    second = sum(
        (
            (-1) ** k * term(0, [(1 + l, False), (k, True), (j - l - 2 - k, False)])
            for l in range(j - 1)
            for k in range(j - l - 1)
        ),
        0j,
    )
    third = sum(((-1) ** k * term(0, [(0, False), (k, True), (j - k - 1, False)]) for k in range(j)), 0j)
    return first / (2 * math.pi) + second / (4 * math.pi) + third / (4 * math.pi)


def _d(jets: BaseJets, j: int) -> complex:
    if j != 2:
        return 0j
    w = spectral.hilbert(spectral.derivative(jets.b[0]))
    return quartic_4diff(w, jets.zt[0], jets.zt_bar[1], jets.zt[1], jets.zt_bar[1]) / (4 * math.pi)


def h_functional(jets: BaseJets, j: int) -> float:
    lam = _d_alpha(jets, theta_jet(jets, j).truncate(0))[0]
    lam_bar = lam.conj()
    zt, zb = jets.zt, jets.zt_bar
    lifted = quartic_4diff(None, lam_bar, lam, zb[0], zt[0]) + quartic_4diff(None, lam_bar, lam_bar, zb[0], zb[0])
    plain = quartic_4diff(None, zt[j], zb[j], zb[0], zt[0]) + quartic_4diff(None, zt[j], zt[j], zb[0], zb[0])
    return (lifted - plain).real / (4 * math.pi)


def corrections(state: WaveState | None, jets: BaseJets | None, j: int) -> dict[str, complex]:
    """C1_j, C2_j and, for j >= 2, F_j, D_j and H_j (zero below j = 2)."""
    jets = _jets(state, jets, j + 2)
    forms = _DifferenceForms(jets)
    out = {"c1": _c1(forms, j), "c2": _c2(forms, j), "f": 0j, "d": 0j, "h": 0j}
    if j >= 2:
        out["f"] = _f(forms, j)
        out["d"] = _d(jets, j)
        out["h"] = complex(h_functional(jets, j))
    return out


def phg_term(jets: BaseJets, j: int) -> complex:
    d0 = spectral.derivative(theta_jet(jets, j)[0])
    return inner(1j * d0, phg(None, jets, j))


def energy_frak(state: WaveState | None, jets: BaseJets | None, j: int) -> float:
    jets = _jets(state, jets, j + 2)
    e, _, _ = energy_quadratic(None, jets, j)
    c = corrections(None, jets, j)
    return e - (phg_term(jets, j) + c["c1"] + c["c2"]).real


def energy_cal(state: WaveState | None, jets: BaseJets | None, j: int) -> float:
    jets = _jets(state, jets, j + 2)
    c = corrections(None, jets, j)
    return energy_frak(None, jets, j) - c["f"].real + c["d"].real - c["h"].real


def frak_e0_rhs(state: WaveState | None, jets: BaseJets | None) -> float:
    """Analytic time derivative of the j = 0 corrected energy."""
    jets = _jets(state, jets, 0)
    zt, zb = jets.zt[0], jets.zt_bar[0]
    inv = jets.inv_za[0]
    gap = 1.0 - jets.a1[0]
    forms = cubic_form(zb, 1j * gap * inv.conj(), zb) + cubic_form(-1j * gap * inv, zt, zb)
    transport = 0.5 * integral(1j * zt * forms)
    weighted = oracle_weighted_4diff(jets.b[0], None, zt, zb, zt, zb)
    return (transport - weighted / (8 * math.pi)).real


def frak_e0_explicit(state: WaveState) -> float:
    """The j = 0 corrected energy written out in Z - alpha and Z_t."""
    zeta, zt = state.zeta, state.zt
    quadratic = integral(1j * spectral.derivative(zeta) * zeta.conj() + zt * zt.conj())
    quartic = quartic_4diff(None, zt, zt.conj(), zt, zt.conj())
    return (quadratic - quartic / (8 * math.pi)).real


def norm_L(state: WaveState) -> float:
    inv = 1.0 / (1.0 + spectral.derivative(state.zeta))
    zb = state.zt.conj()
    dzb = spectral.derivative(zb)
    return (
        norm(inv, "Hhalf")
        + norm(dzb)
        + norm(spectral.derivative(inv), "Hhalf")
        + norm(spectral.derivative(dzb))
    )


def energy_proxies(jets: BaseJets) -> tuple[float, float | None]:
    """Quadratic stand-ins for E_1 and E_3 (the latter needs jets of order 4)."""
    inv = jets.inv_za[0]
    e1 = norm(1.0 - inv) ** 2 + norm(theta_jet(jets, 2)[0], "Hhalf") ** 2
    if jets.order < 4:
        return e1, None
    d_alpha_sq = inv * spectral.derivative(inv * inv)
    e3 = 0.25 * norm(d_alpha_sq) ** 2 + norm(theta_jet(jets, 4)[0], "Hhalf") ** 2
    return e1, e3


def energy_identity_sides(jets: BaseJets, j: int = 1) -> tuple[float, float]:
    """E(t) for Theta_1 = Theta^(j), Theta_2 = Theta^(j+1), and its analytic derivative."""
    jets = _jets(None, jets, j + 3)
    t1, t2 = theta_jet(jets, j), theta_jet(jets, j + 1)
    d1, d2 = spectral.derivative(t1[0]), spectral.derivative(t2[0])
    energy = inner(1j * d2, t1[1]) - inner(1j * d1, t2[1])
    rate = inner(1j * d2, phg_direct(None, jets, j)) - inner(1j * d1, phg_direct(None, jets, j + 1))
    return energy.real, rate.real


def energy_report(
    state: WaveState,
    max_j: int,
    jet_order: int | None = None,
    with_rhs: bool = True,
) -> EnergyReport:
    order = max(jet_order or 0, max_j + 2)
    jets = build_base_jets(state, order)
    aux = compute_aux(state)
    levels = []
    for j in range(max_j + 1):
        e, decomposition, imag_residue = energy_quadratic(None, jets, j)
        c = corrections(None, jets, j)
        p = phg_term(jets, j)
        frak = e - (p + c["c1"] + c["c2"]).real
        cal = frak - c["f"].real + c["d"].real - c["h"].real
        gap = abs(e - decomposition)
        if gap > 1e-8 * max(abs(e), 1e-300):
            logger.debug("energy decomposition gap j=%d gap=%.3e E=%.6e", j, gap, e)
        levels.append(
            EnergyLevel(
                j=j,
                E=e,
                frak=frak,
                cal=cal,
                phg_term=p.real,
                c1=c["c1"].real,
                c2=c["c2"].real,
                f=c["f"].real,
                d=c["d"].real,
                h=c["h"].real,
                decomposition_gap=gap,
                imag_residue=imag_residue,
            )
        )

    e1_proxy, e3_proxy = energy_proxies(jets)
    e1e3 = levels[1].E * levels[3].E if max_j >= 3 else None
    if max_j >= 1:
        logger.debug("E1=%.6e proxy=%.6e", levels[1].E, e1_proxy)
    record = residuals(state, aux)
    logger.debug("slice t=%.6g b_zero_mode=%.3e a1_imag=%.3e", state.t, record.b_zero_mode, record.a1_imag_residue)
    return EnergyReport(
        t=state.t,
        levels=levels,
        frak_e0_rhs=frak_e0_rhs(None, jets) if with_rhs else None,
        frak_e0_explicit=frak_e0_explicit(state),
        e1_proxy=e1_proxy,
        e3_proxy=e3_proxy,
        e1e3=e1e3,
        residuals=record,
    )


def steepness_ratio(report: EnergyReport) -> float | None:
    """|1/Z_a - 1|_inf^4 / (E_1 E_3), bounded by a fixed constant along small solutions."""
    if report.e1e3 is None or report.e1e3 <= 0:
        return None
    return report.residuals.steepness**4 / report.e1e3


def series(reports: Sequence[EnergyReport], name: str, j: int | None = None) -> np.ndarray:
    if j is None:
        return np.array([getattr(r, name) for r in reports], dtype=float)
    return np.array([getattr(r.level(j), name) for r in reports], dtype=float)
