"""Property suite behind ``riemannwave verify`` and ``POST /api/verify``.

Each check draws its own generator from (seed, check name), so a subset of checks
sees the same inputs as the full suite.
"""
import logging
import math
import time
import zlib
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

from riemannwave.core.exceptions import RiemannWaveError
from riemannwave.numerics import calculus, energy, spectral
from riemannwave.numerics.calculus import bracket, cubic_form, quartic_4diff, quartic_pairing
from riemannwave.numerics.energy import theta_jet
from riemannwave.numerics.evolution import (
    WaveState,
    a1_commutator_form,
    compute_aux,
    max_stable_dt,
    rescale_state,
    step,
)
from riemannwave.numerics.jets import (
    BaseJets,
    MaterialJet,
    build_base_jets,
    jet_derivative,
    jet_hilbert,
    jet_multiplier,
)
from riemannwave.numerics.spectral import Grid, SpectralField, norm
from riemannwave.schemas.verify import PropertyResult, VerifyReport
from riemannwave.services import output
from riemannwave.services.runner import integrate
from riemannwave.utils.sampling import random_field, random_real_field, random_state

logger = logging.getLogger(__name__)

VERIFY_NAME = "verify.json"
JET_ORDER = 4


@dataclass
class Outcome:
    value: float
    samples: int = 1
    detail: str = ""
    passed: Optional[bool] = None


@dataclass(frozen=True)
class Check:
    name: str
    module: str
    fn: Callable[["Context"], Outcome]
    threshold: Optional[float]
    mandatory: bool = True
    dynamics: bool = False


REGISTRY: List[Check] = []


def check(name: str, module: str, threshold: Optional[float], mandatory: bool = True, dynamics: bool = False):
    def register(fn):
        REGISTRY.append(Check(name, module, fn, threshold, mandatory, dynamics))
        return fn

    return register


class Context:
    def __init__(self, seed: int, N: int, name: str):
        self.rng = np.random.default_rng([seed, zlib.crc32(name.encode())])
        self.grid = Grid(N)

    def field(self, side="both", mean_zero=True) -> SpectralField:
        return random_field(self.grid, self.rng, side=side, mean_zero=mean_zero)

    @cached_property
    def state(self) -> WaveState:
        return random_state(self.grid, self.rng)

    @cached_property
    def jets(self) -> BaseJets:
        return build_base_jets(self.state, JET_ORDER)

    @cached_property
    def dt(self) -> float:
        return min(1e-2, 0.8 * max_stable_dt(self.state))


def _rel(a, b) -> float:
    if isinstance(a, SpectralField):
        diff, scale = (a - b).max_abs(), max(a.max_abs(), b.max_abs())
    else:
        diff, scale = abs(a - b), max(abs(a), abs(b))
    return diff / scale if scale > 0 else diff


def _demean(f: SpectralField) -> SpectralField:
    return f - spectral.mean(f)


def _fine_sup(f: SpectralField, factor: int = 4) -> float:
    """max|f| on a grid ``factor`` times finer, by zero padding."""
    fine = Grid(f.grid.N * factor, f.grid.L)
    c = np.zeros(fine.N, dtype=complex)
    index = np.rint(f.grid.wavenumbers * f.grid.L / (2 * math.pi)).astype(int)
    c[index % fine.N] = f.coeffs
    return SpectralField.from_coeffs(fine, c).max_abs()


def finite_part_bracket(f: SpectralField, g: SpectralField, h: SpectralField) -> SpectralField:
    """[f, g; h] by expanding both differences against the finite-part kernel -d H."""

    def T(u: SpectralField) -> SpectralField:
        return -spectral.derivative(spectral.hilbert(u))

    return f * g * T(h) - f * T(g * h) - g * T(f * h) + T(f * g * h)


# ---- spectral_core


@check("hilbert_involution", "spectral_core", 1e-13)
def _hilbert_involution(ctx: Context) -> Outcome:
    f = ctx.field()
    return Outcome(_rel(spectral.hilbert(spectral.hilbert(f)), f))


@check("paph", "spectral_core", 1e-14)
def _paph(ctx: Context) -> Outcome:
    f = ctx.field(mean_zero=False)
    return Outcome(_rel(spectral.project(f, "holo") + spectral.project(f, "anti"), f))


@check("projid", "spectral_core", 1e-14)
def _projid(ctx: Context) -> Outcome:
    f = ctx.field(mean_zero=False)
    ha = spectral.project(spectral.project(f, "anti"), "holo")
    ah = spectral.project(spectral.project(f, "holo"), "anti")
    return Outcome(max(ha.max_abs(), ah.max_abs()) / f.max_abs())


@check("idempotent", "spectral_core", 1e-14)
def _idempotent(ctx: Context) -> Outcome:
    f = ctx.field(mean_zero=False)
    return Outcome(
        max(_rel(spectral.project(spectral.project(f, side), side), spectral.project(f, side)) for side in ("holo", "anti"))
    )


@check("hhalfp", "spectral_core", 1e-10)
def _hhalfp(ctx: Context) -> Outcome:
    f = ctx.field(side="holo")
    return Outcome(_rel(spectral.inner(1j * spectral.derivative(f), f), norm(f, "Hhalf") ** 2))


@check("hhalfn", "spectral_core", 1e-10)
def _hhalfn(ctx: Context) -> Outcome:
    f = ctx.field()
    lhs = spectral.inner(1j * spectral.derivative(f), f)
    rhs = norm(spectral.project(f, "holo"), "Hhalf") ** 2 - norm(spectral.project(f, "anti"), "Hhalf") ** 2
    return Outcome(abs(lhs - rhs) / norm(f, "Hhalf") ** 2)


@check("hhalf_double_integral", "spectral_core", 1e-8)
def _hhalf_double_integral(ctx: Context) -> Outcome:
    f = ctx.field()
    return Outcome(_rel(norm(f, "Hhalf"), calculus.oracle_hhalf(f)))


@check("hilbert_oracle", "spectral_core", 1e-8)
def _hilbert_oracle(ctx: Context) -> Outcome:
    f = ctx.field(mean_zero=False)
    return Outcome(_rel(spectral.hilbert(f), calculus.oracle_hilbert(f)))


@check("sobolev", "spectral_core", 1.0)
def _sobolev(ctx: Context) -> Outcome:
    """max over samples of |f|_inf^2 / (2 |f| |f'|) for real mean-zero f."""
    worst, samples = 0.0, 1000
    for _ in range(samples):
        f = random_real_field(ctx.grid, ctx.rng)
        rhs = 2 * norm(f) * norm(spectral.derivative(f))
        if rhs > 0:
            worst = max(worst, f.max_abs() ** 2 / rhs)
    return Outcome(worst, samples)


# ---- calculus_ops


def _oracle_samples(ctx: Context, fast, slow, samples: int = 100) -> Outcome:
    worst = 0.0
    for i in range(samples):
        worst = max(worst, _rel(fast(i), slow(i)))
    return Outcome(worst, samples)


@check("oracle_bracket", "calculus_ops", 1e-6)
def _oracle_bracket(ctx: Context) -> Outcome:
    triples = [(ctx.field(), ctx.field(), ctx.field(mean_zero=False) if i % 2 else None) for i in range(100)]
    return _oracle_samples(ctx, lambda i: bracket(*triples[i]), lambda i: calculus.oracle_bracket(*triples[i]))


@check("oracle_cubic", "calculus_ops", 1e-6)
def _oracle_cubic(ctx: Context) -> Outcome:
    triples = [(ctx.field(), ctx.field(), ctx.field()) for _ in range(100)]
    return _oracle_samples(ctx, lambda i: cubic_form(*triples[i]), lambda i: calculus.oracle_cubic(*triples[i]))


@check("oracle_quartic", "calculus_ops", 1e-6)
def _oracle_quartic(ctx: Context) -> Outcome:
    cases = [tuple(ctx.field(mean_zero=False) for _ in range(5)) for _ in range(100)]

    def fast(i):
        F, f1, f2, f3, f4 = cases[i]
        return quartic_pairing(F, f1, f2, f3) if i % 2 else quartic_4diff(F, f1, f2, f3, f4)

    def slow(i):
        F, f1, f2, f3, f4 = cases[i]
        return calculus.oracle_pairing(F, f1, f2, f3) if i % 2 else calculus.oracle_4diff(F, f1, f2, f3, f4)

    return _oracle_samples(ctx, fast, slow)


@check("c29_two_sided", "calculus_ops", 1e-8)
def _c29_two_sided(ctx: Context) -> Outcome:
    f, g, h = ctx.field(), ctx.field(), ctx.field(mean_zero=False)
    return Outcome(_rel(bracket(f, g, h), finite_part_bracket(f, g, h)))


@check("c30", "calculus_ops", 1e-8)
def _c30(ctx: Context) -> Outcome:
    f, g, h = ctx.field(), ctx.field(), ctx.field(side="holo")
    lhs = spectral.project(bracket(f, g, h), "holo")

    def anti_d(u):
        return spectral.derivative(spectral.project(u, "anti"))

    rhs = -2 * spectral.project(f * anti_d(g * h), "holo") - 2 * spectral.project(g * anti_d(f * h), "holo")
    return Outcome(_rel(lhs, rhs))


@check("cubic_permutations", "calculus_ops", 1e-12)
def _cubic_permutations(ctx: Context) -> Outcome:
    args = (ctx.field(), ctx.field(), ctx.field())
    first = cubic_form(*args)
    return Outcome(max(_rel(cubic_form(*p), first) for p in permutations(args)), samples=6)


@check("halfholo", "calculus_ops", 1e-8)
def _halfholo(ctx: Context) -> Outcome:
    f, g, f1, g1 = (ctx.field(side="holo") for _ in range(4))
    lhs = spectral.integral(spectral.derivative(spectral.project(f.conj() * g, "anti")) * f1 * g1.conj())
    rhs = -0.5 * spectral.integral(g1.conj() * bracket(f.conj(), f1, g))
    return Outcome(_rel(lhs, rhs))


@check("sup_bound", "calculus_ops", 1.0)
def _sup_bound(ctx: Context) -> Outcome:
    """|f-1|_inf^2 <= 18 |f-1| |f^2 f'| for f - 1 vanishing somewhere and |f-1|_inf <= 1."""
    worst, samples = 0.0, 1000
    for _ in range(samples):
        h = ctx.field(mean_zero=False)
        h = h - SpectralField.constant(ctx.grid, h.values[0])
        h = h * (ctx.rng.uniform(0.05, 1.0) / h.max_abs())
        f = 1.0 + h
        rhs = 18 * norm(h) * norm(f * f * spectral.derivative(f))
        worst = max(worst, h.max_abs() ** 2 / rhs)
    return Outcome(worst, samples)


@check("projection_bound", "calculus_ops", 1.0)
def _projection_bound(ctx: Context) -> Outcome:
    """delta |f|_H1/2 <= |P_H(f conj(1 + w))|_H1/2 for holomorphic f, w with sup|w| = 1 - delta."""
    worst, samples = 0.0, 1000
    for _ in range(samples):
        w = ctx.field(side="holo")
        w = w * (ctx.rng.uniform(0.05, 0.95) / _fine_sup(w))
        delta = 1.0 - _fine_sup(w)
        f = ctx.field(side="holo")
        rhs = norm(spectral.project(f * (1.0 + w).conj(), "holo"), "Hhalf")
        worst = max(worst, delta * norm(f, "Hhalf") / rhs)
    return Outcome(worst, samples)


# ---- jet_algebra


@check("ba", "jet_algebra", 1e-9)
def _ba(ctx: Context) -> Outcome:
    j = ctx.jets
    inv, zt = j.inv_za[0], j.zt[0]
    lhs = spectral.derivative(j.b[0]) - 2 * (inv * spectral.derivative(zt)).real
    rhs = 0.5 * bracket(inv, zt) - 0.5 * bracket(zt.conj(), inv.conj())
    return Outcome(_rel(lhs, rhs))


@check("c26", "jet_algebra", 1e-9)
def _c26(ctx: Context) -> Outcome:
    j = ctx.jets
    inv = j.inv_za[0]
    expected = inv * (spectral.derivative(j.b[0]) - inv * spectral.derivative(j.zt[0]))
    return Outcome(_rel(j.inv_za[1], expected))


@check("c28", "jet_algebra", 1e-9)
def _c28(ctx: Context) -> Outcome:
    j = ctx.jets
    f = MaterialJet((ctx.field(), ctx.field()))
    inv = j.inv_za.truncate(1)
    weight = inv * inv.conj()
    df = jet_derivative(f, j.b)
    lhs = (weight * df)[1] - weight[0] * spectral.derivative(f[1])
    coeff = spectral.derivative(j.b[0]) - 2 * (inv[0] * spectral.derivative(j.zt[0])).real
    rhs = coeff * weight[0] * spectral.derivative(f[0])
    return Outcome(_rel(lhs, rhs))


@check("quasi", "jet_algebra", 1e-8)
def _quasi(ctx: Context) -> Outcome:
    j = ctx.jets
    inv, a1 = j.inv_za[0], j.a1[0]
    zb = j.zt_bar
    lhs = zb[2] + 1j * a1 * (inv * inv.conj()) * spectral.derivative(zb[0])
    factor = j.a1[1] / a1 + spectral.derivative(j.b[0]) - 2 * (inv * spectral.derivative(j.zt[0])).real
    rhs = factor * (j.ztt[0].conj() - 1j)
    return Outcome(_rel(lhs, rhs))


@check("flat_nilpotence", "jet_algebra", 0.0)
def _flat_nilpotence(ctx: Context) -> Outcome:
    j = build_base_jets(WaveState.flat(ctx.grid), JET_ORDER)
    worst = max(
        jet[k].max_abs() for jet in (j.zeta, j.zt, j.za, j.inv_za, j.b, j.a1, j.ztt) for k in range(1, jet.order + 1)
    )
    return Outcome(worst)


@check("jet_hilbert_involution", "jet_algebra", 1e-10)
def _jet_hilbert_involution(ctx: Context) -> Outcome:
    j = ctx.jets
    f = MaterialJet(tuple(ctx.field(mean_zero=False) for _ in range(JET_ORDER)))
    twice = jet_hilbert(jet_hilbert(f, j.b), j.b)
    return Outcome(max(_rel(_demean(twice[k]), _demean(f[k])) for k in range(f.order + 1)), samples=f.order + 1)


@check("jet_derivative_multiplier", "jet_algebra", 1e-10)
def _jet_derivative_multiplier(ctx: Context) -> Outcome:
    j = ctx.jets
    f = MaterialJet(tuple(ctx.field() for _ in range(JET_ORDER)))
    a, b = jet_derivative(f, j.b), jet_multiplier(f, j.b, spectral.derivative)
    return Outcome(max(_rel(a[k], b[k]) for k in range(f.order + 1)), samples=f.order + 1)


@check("jet_reciprocal", "jet_algebra", 1e-10)
def _jet_reciprocal(ctx: Context) -> Outcome:
    j = ctx.jets
    one = j.za * j.inv_za
    worst = max([(one[0] - 1.0).max_abs()] + [one[k].max_abs() for k in range(1, one.order + 1)])
    return Outcome(worst)


# ---- evolution / energy_diagnostics


@check("q1", "evolution", 1e-8)
def _q1(ctx: Context) -> Outcome:
    j = ctx.jets
    q = energy.q_jet(j)
    zt = j.zt[0]
    residual = q[1] - 1j * j.zeta[0] - spectral.project(zt * zt.conj(), "anti")
    return Outcome(norm(_demean(residual)) / norm(q[0]))


@check("q2", "energy_diagnostics", 1e-7)
def _q2(ctx: Context) -> Outcome:
    j = ctx.jets
    inv, zt = j.inv_za[0], j.zt[0]
    q = energy.q_jet(j)
    anti = spectral.project(zt * (1.0 - inv) + zt.conj() * (inv.conj() - 1.0), "anti")
    residual = theta_jet(j, 1)[1] + 1j * (inv * inv.conj()) * spectral.derivative(q[0]) - 1j * anti
    return Outcome(norm(_demean(residual)) / norm(theta_jet(j, 1)[1]))


@check("theta_one", "energy_diagnostics", 1e-8)
def _theta_one(ctx: Context) -> Outcome:
    j = ctx.jets
    return Outcome(_rel(_demean(theta_jet(j, 1)[0]), _demean(1j * j.zeta[0])))


@check("theta_two", "energy_diagnostics", 1e-8)
def _theta_two(ctx: Context) -> Outcome:
    j = ctx.jets
    return Outcome(_rel(_demean(theta_jet(j, 2)[0]), _demean(-1j * spectral.project(j.b[0], "holo"))))


@check("theta_d_alpha", "energy_diagnostics", 1e-8)
def _theta_d_alpha(ctx: Context) -> Outcome:
    j = ctx.jets
    inv = j.inv_za[0]
    return Outcome(_rel(inv * spectral.derivative(theta_jet(j, 1)[0]), 1j * (1.0 - inv)))


@check("theta_recursion", "energy_diagnostics", 1e-7)
def _theta_recursion(ctx: Context) -> Outcome:
    j = ctx.jets
    inv = j.inv_za[0]
    worst = 0.0
    for level in (1, 2):
        lhs = theta_jet(j, level + 2)[0]
        rhs = -1j * spectral.project((inv * inv.conj()) * spectral.derivative(theta_jet(j, level)[0]), "holo")
        rhs = rhs + energy.phg(None, j, level)
        worst = max(worst, _rel(_demean(lhs), _demean(rhs)))
    return Outcome(worst, samples=2)


@check("phg_recursion", "energy_diagnostics", 1e-6)
def _phg_recursion(ctx: Context) -> Outcome:
    j = ctx.jets
    worst = max(
        _rel(_demean(energy.phg(None, j, level)), _demean(energy.phg_direct(None, j, level))) for level in (1, 2)
    )
    return Outcome(worst, samples=2)


@check("decomposition", "energy_diagnostics", 1e-8)
def _decomposition(ctx: Context) -> Outcome:
    j = ctx.jets
    worst = 0.0
    for level in range(JET_ORDER - 1):
        e, decomposition, _ = energy.energy_quadratic(None, j, level)
        worst = max(worst, _rel(e, decomposition))
    return Outcome(worst, samples=JET_ORDER - 1)


@check("frak_e0_explicit", "energy_diagnostics", 1e-9)
def _frak_e0_explicit(ctx: Context) -> Outcome:
    return Outcome(_rel(energy.energy_frak(None, ctx.jets, 0), energy.frak_e0_explicit(ctx.state)))


@check("h0", "energy_diagnostics", 1e-12)
def _h0(ctx: Context) -> Outcome:
    j = ctx.jets
    e0, _, _ = energy.energy_quadratic(None, j, 0)
    return Outcome(abs(energy.h_functional(j, 0)) / abs(e0))


@check("a1_bound", "evolution", 1e-10)
def _a1_bound(ctx: Context) -> Outcome:
    aux = compute_aux(ctx.state)
    return Outcome(max(0.0, 1.0 - float(np.min(aux.a1.values.real))))


@check("a1_two_ways", "evolution", 1e-10)
def _a1_two_ways(ctx: Context) -> Outcome:
    aux = compute_aux(ctx.state)
    gap = _rel(aux.a1, a1_commutator_form(ctx.state))
    return Outcome(max(gap, aux.a1_imag_residue), detail=f"imag residue {aux.a1_imag_residue:.2e}")


# ---- dynamics


@check("reversibility", "evolution", 1e-10, dynamics=True)
def _reversibility(ctx: Context) -> Outcome:
    state = ctx.state
    back = step(step(state, 1e-3), -1e-3, allow_backward=True)
    return Outcome(max(_rel(back.zeta, state.zeta), _rel(back.zt, state.zt)))


@check("scaling", "evolution", 1e-6, dynamics=True)
def _scaling(ctx: Context) -> Outcome:
    lam, n_steps = 2.0, 20
    dt = 0.5 * ctx.dt
    state = ctx.state
    direct = rescale_state(integrate(state, dt, n_steps), lam)
    scaled = integrate(rescale_state(state, lam), dt / math.sqrt(lam), n_steps)
    return Outcome(max(_rel(scaled.zeta, direct.zeta), _rel(scaled.zt, direct.zt)))


def _partial_rates(state: WaveState) -> dict[str, tuple[SpectralField, SpectralField]]:
    """Component 0 and the jet prediction of its partial time derivative."""
    j = build_base_jets(state, 3)
    b = j.b[0]
    out = {}
    for name, jet in (("a1", j.a1), ("b", j.b), ("theta2", theta_jet(j, 2))):
        out[name] = (jet[0], jet[1] - b * spectral.derivative(jet[0]))
    return out


@check("jet_time_consistency", "jet_algebra", 1.8, dynamics=True)
def _jet_time_consistency(ctx: Context) -> Outcome:
    state = ctx.state
    predicted = _partial_rates(state)
    errors: dict[str, list[float]] = {name: [] for name in predicted}
    for h in (ctx.dt, ctx.dt / 2):
        ahead = _partial_rates(step(state, h))
        behind = _partial_rates(step(state, -h, allow_backward=True))
        for name, (_, rate) in predicted.items():
            fd = (ahead[name][0] - behind[name][0]) * (1 / (2 * h))
            errors[name].append(_rel(fd, rate))
    orders = {name: math.log2(e[0] / e[1]) for name, e in errors.items()}
    worst = min(orders.values())
    detail = ", ".join(f"{name}={order:.2f}" for name, order in orders.items())
    return Outcome(worst, samples=len(orders), detail=detail, passed=worst >= 1.8)


@check("energy_identity", "evolution", 1e-3, mandatory=False, dynamics=True)
def _energy_identity(ctx: Context) -> Outcome:
    state, h = ctx.state, 1e-3
    order = JET_ORDER
    e_plus, _ = energy.energy_identity_sides(build_base_jets(step(state, h), order))
    e_minus, _ = energy.energy_identity_sides(build_base_jets(step(state, -h, allow_backward=True), order))
    _, rate = energy.energy_identity_sides(ctx.jets)
    return Outcome(_rel((e_plus - e_minus) / (2 * h), rate))


def _evaluate(item: Check, seed: int, N: int) -> PropertyResult:
    ctx = Context(seed, N, item.name)
    try:
        with np.errstate(all="ignore"):
            outcome = item.fn(ctx)
    except (RiemannWaveError, ArithmeticError, ValueError) as exc:
        logger.warning("property %s raised: %s", item.name, exc)
        return PropertyResult(
            name=item.name, module=item.module, mandatory=item.mandatory, passed=False, threshold=item.threshold, detail=str(exc)
        )
    value = float(outcome.value)
    passed = outcome.passed
    if passed is None:
        passed = math.isfinite(value) and value <= item.threshold
    return PropertyResult(
        name=item.name,
        module=item.module,
        mandatory=item.mandatory,
        passed=bool(passed),
        value=value if math.isfinite(value) else None,
        threshold=item.threshold,
        samples=outcome.samples,
        detail=outcome.detail,
    )


def run_verification(
    seed: int = 0,
    N: int = 256,
    include_dynamics: bool = True,
    names: Sequence[str] | None = None,
    out_dir: str | Path | None = None,
) -> VerifyReport:
    start = time.perf_counter()
    selected = [c for c in REGISTRY if (include_dynamics or not c.dynamics) and (names is None or c.name in names)]
    results = []
    for item in selected:
        result = _evaluate(item, seed, N)
        logger.info("property %s passed=%s value=%s", result.name, result.passed, result.value)
        results.append(result)
    failures = [r.name for r in results if r.mandatory and not r.passed]
    report = VerifyReport(
        seed=seed,
        N=N,
        passed=not failures,
        mandatory_failures=failures,
        results=results,
        elapsed=time.perf_counter() - start,
    )
    if out_dir is not None:
        output.write_json(output.ensure_dir(out_dir) / VERIFY_NAME, report)
    return report
