import logging
import math
from pathlib import Path

import numpy as np

from riemannwave.numerics import spectral
from riemannwave.numerics.energy import theta
from riemannwave.numerics.evolution import WaveState, make_initial_data, max_stable_dt
from riemannwave.numerics.spectral import Grid, SpectralField
from riemannwave.schemas.config import RunConfig
from riemannwave.schemas.report import ConvergenceReport, ConvergenceRow
from riemannwave.services import output
from riemannwave.services.runner import integrate, make_grid, make_profile, resolve_steps
from riemannwave.utils.stencils import observed_order

logger = logging.getLogger(__name__)

CONVERGE_NAME = "converge.json"


def _state_gap(a: WaveState, b: WaveState) -> float:
    scale = max(spectral.norm(b.zeta) + spectral.norm(b.zt), 1e-300)
    return (spectral.norm(a.zeta - b.zeta) + spectral.norm(a.zt - b.zt)) / scale


def _lift(f: SpectralField, grid: Grid) -> np.ndarray:
    """Coefficients of ``f`` placed by wavenumber on the finer ``grid``."""
    c = np.zeros(grid.N, dtype=complex)
    index = np.rint(f.grid.wavenumbers * f.grid.L / (2 * math.pi)).astype(int)
    c[index % grid.N] = f.coeffs
    return c


def dt_refinement(config: RunConfig, levels: int = 3) -> tuple[list[ConvergenceRow], float | None]:
    """Self-convergence of the final state under dt, dt/2, dt/4, ..."""
    state0 = make_initial_data(make_profile(config), config.physics.epsilon, make_grid(config))
    dt, n_steps = resolve_steps(config, state0)
    finals = [integrate(state0, dt / 2**i, n_steps * 2**i, config.stepping.project_constraints) for i in range(levels)]
    rows, errors = [], []
    for i in range(levels - 1):
        errors.append(_state_gap(finals[i], finals[i + 1]))
        rows.append(ConvergenceRow(parameter="dt", value=dt / 2**i, error=errors[-1], observed_order=observed_order(errors)))
        logger.info("dt=%.4g gap=%.3e", dt / 2**i, errors[-1])
    return rows, observed_order(errors)


def n_refinement(config: RunConfig) -> list[ConvergenceRow]:
    """Theta^(2) at T_final on N/4, N/2, N against a 2N reference, at one shared dt."""
    N = config.grid.N
    sizes = [n for n in (N // 4, N // 2, N) if n >= 16]
    profile, epsilon = make_profile(config), config.physics.epsilon
    base = make_grid(config)
    ref_grid = Grid(2 * N, base.L, base.dealias)
    ref0 = make_initial_data(profile, epsilon, ref_grid)
    dt, n_steps = resolve_steps(config, ref0)
    bound = max_stable_dt(ref0, 0.5)
    if dt > bound:
        n_steps = math.ceil(config.stepping.T_final / bound)
        dt = config.stepping.T_final / n_steps

    def theta2(grid: Grid) -> SpectralField:
        final = integrate(make_initial_data(profile, epsilon, grid), dt, n_steps, config.stepping.project_constraints)
        return theta(final, None, 2)

    ref = theta2(ref_grid)
    scale = max(float(np.linalg.norm(ref.coeffs)), 1e-300)
    rows, errors = [], []
    for n in sizes:
        err = float(np.linalg.norm(_lift(theta2(Grid(n, base.L, base.dealias)), ref_grid) - ref.coeffs)) / scale
        errors.append(err)
        rows.append(ConvergenceRow(parameter="N", value=n, error=err, observed_order=observed_order(errors)))
        logger.info("N=%d theta2 error=%.3e", n, err)
    return rows


def run_convergence(config: RunConfig, out_dir: str | Path | None = None) -> ConvergenceReport:
    report = ConvergenceReport(t_final=config.stepping.T_final)
    if config.stepping.T_final > 0:
        report.dt_rows, report.dt_order = dt_refinement(config)
        report.n_rows = n_refinement(config)
    if out_dir is not None:
        output.write_json(output.ensure_dir(out_dir) / CONVERGE_NAME, report)
    return report
