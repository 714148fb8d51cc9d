import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from riemannwave.core.config import settings
from riemannwave.core.exceptions import EXIT_CONSTRAINT, EXIT_OK, ConstraintBreachError, RiemannWaveError
from riemannwave.numerics.energy import energy_report, series
from riemannwave.numerics.evolution import (
    InitialProfile,
    WaveState,
    make_initial_data,
    max_stable_dt,
    simulate,
    tile_state,
)
from riemannwave.numerics.spectral import FilterRule, Grid
from riemannwave.schemas.config import RunConfig
from riemannwave.schemas.report import EnergyReport, ResidualRecord, RunSummary
from riemannwave.services import output
from riemannwave.utils.stencils import max_abs_rate, time_derivative

logger = logging.getLogger(__name__)

A1_FLOOR = 1.0 - 1e-10
# step-level CFL guard; a configured cfl only sets dt
DEFAULT_CFL = 1.0


@dataclass
class RunResult:
    summary: RunSummary
    reports: List[EnergyReport] = field(default_factory=list)
    final_state: Optional[WaveState] = None


def make_grid(config: RunConfig) -> Grid:
    rule = FilterRule(config.stepping.filter, config.stepping.filter_threshold)
    return Grid(config.grid.N, config.grid.L, rule)


def make_profile(config: RunConfig) -> InitialProfile:
    p = config.physics
    return InitialProfile(kind=p.profile, k0=p.k0, k_center=p.k_center, width=p.width, coeffs=tuple(p.coeffs))


def initial_state(config: RunConfig, periods: int = 1) -> WaveState:
    state = make_initial_data(make_profile(config), config.physics.epsilon, make_grid(config))
    return tile_state(state, periods)


def resolve_steps(config: RunConfig, state: WaveState) -> tuple[float, int]:
    """(dt, n_steps) with n_steps * dt == T_final exactly."""
    T = config.stepping.T_final
    if config.stepping.dt is not None:
        dt = config.stepping.dt
    else:
        dt = max_stable_dt(state, config.stepping.cfl)
    if T == 0:
        return dt, 0
    n_steps = max(1, math.ceil(T / dt - 1e-9))
    return T / n_steps, n_steps


def check_constraints(record: ResidualRecord, t: float) -> None:
    tol = settings.residual_tolerance
    if record.holo_zt > tol or record.holo_inv_za > tol:
        raise ConstraintBreachError(
            f"holomorphy residual {max(record.holo_zt, record.holo_inv_za):.3e} > {tol:.1e} at t={t:.6g}"
        )
    if record.min_a1 < A1_FLOOR:
        raise ConstraintBreachError(f"min A1={record.min_a1:.12f} below 1 at t={t:.6g}")


def _regular(reports: List[EnergyReport], spacing: float) -> List[EnergyReport]:
    """Reports on the uniform slice grid; a shorter final interval is dropped."""
    if len(reports) > 1 and not math.isclose(reports[-1].t - reports[-2].t, spacing, rel_tol=1e-6):
        return reports[:-1]
    return reports


def _rates(reports: List[EnergyReport], name: str, max_j: int, spacing: float) -> List[Optional[float]]:
    return [max_abs_rate(series(reports, name, j), spacing) for j in range(max_j + 1)]


def _rhs_deviation(reports: List[EnergyReport], spacing: float) -> Optional[float]:
    """Max relative gap between the differenced j = 0 corrected energy and its analytic rate."""
    rates = time_derivative(series(reports, "frak", 0), spacing)
    if rates.size == 0 or any(r.frak_e0_rhs is None for r in reports):
        return None
    rhs = np.array([r.frak_e0_rhs for r in reports[2:-2]])
    scale = float(np.max(np.abs(rhs)))
    if scale == 0:
        return float(np.max(np.abs(rates)))
    return float(np.max(np.abs(rates - rhs)) / scale)


def summarize(
    name: str,
    config: RunConfig,
    reports: List[EnergyReport],
    dt: float,
    n_steps: int,
    wall_time: float,
    exit_code: int = EXIT_OK,
    message: str = "",
    grid: Grid | None = None,
) -> RunSummary:
    max_j = config.diagnostics.max_j
    spacing = config.diagnostics.report_every * dt
    grid = grid or make_grid(config)
    summary = RunSummary(
        name=name,
        status="ok" if exit_code == EXIT_OK else "failed",
        exit_code=exit_code,
        message=message,
        seed=config.seed,
        epsilon=config.physics.epsilon,
        N=grid.N,
        L=grid.L,
        dt=dt,
        steps=n_steps,
        t_final=reports[-1].t if reports else 0.0,
        reports=len(reports),
        wall_time=wall_time,
    )
    if not reports:
        return summary
    norms = [r.residuals.norm_L for r in reports]
    summary.min_a1 = min(r.residuals.min_a1 for r in reports)
    summary.norm_L_initial = norms[0]
    summary.norm_L_max = max(norms)
    summary.max_holo_residual = max(max(r.residuals.holo_zt, r.residuals.holo_inv_za) for r in reports)
    summary.final_residuals = reports[-1].residuals
    regular = _regular(reports, spacing)
    summary.max_rate_E = _rates(regular, "E", max_j, spacing)
    summary.max_rate_frak = _rates(regular, "frak", max_j, spacing)
    summary.max_rate_cal = _rates(regular, "cal", max_j, spacing)
    summary.max_cal_minus_E = [
        float(np.max(np.abs(series(reports, "cal", j) - series(reports, "E", j)))) for j in range(max_j + 1)
    ]
    summary.frak_e0_rhs_deviation = _rhs_deviation(regular, spacing)
    return summary


def run_simulation(
    config: RunConfig,
    out_dir: str | Path | None = None,
    periods: int = 1,
    write: bool = True,
) -> RunResult:
    """Integrate one configured run, reporting energies every ``report_every`` steps.

    Domain failures end the run early; the summary carries their exit code.
    """
    out_dir = Path(out_dir or config.output.directory)
    formats = set(config.output.formats) if write else set()
    if formats:
        output.ensure_dir(out_dir)
    diag = config.diagnostics
    start = time.perf_counter()

    reports: List[EnergyReport] = []
    state: WaveState | None = None
    dt, n_steps = 0.0, 0
    cfl = max(DEFAULT_CFL, 2 * (config.stepping.cfl or 0.0))
    writer = output.ReportWriter(out_dir / output.CSV_NAME) if "csv" in formats else None
    exit_code, message = EXIT_OK, ""
    try:
        state = initial_state(config, periods)
        dt, n_steps = resolve_steps(config, state)
        logger.info("run name=%s epsilon=%.4g N=%d dt=%.4g steps=%d", out_dir.name, config.physics.epsilon, state.grid.N, dt, n_steps)
        for n, state in simulate(state, dt, n_steps, diag.report_every, config.stepping.project_constraints, cfl):
            report = energy_report(state, diag.max_j, diag.jet_order)
            reports.append(report)
            if writer:
                writer.write(report)
            logger.debug("step n=%d t=%.6g min_a1=%.10f", n, state.t, report.residuals.min_a1)
            check_constraints(report.residuals, state.t)
    except RiemannWaveError as exc:
        exit_code, message = exc.exit_code, str(exc)
        logger.warning("run stopped: %s", message)
    finally:
        if writer:
            writer.close()

    summary = summarize(
        out_dir.name, config, reports, dt, n_steps, time.perf_counter() - start, exit_code, message,
        state.grid if state is not None else None,
    )
    if exit_code == EXIT_CONSTRAINT:
        summary.status = "constraint_breach"
    if "json" in formats:
        output.write_json(out_dir / output.SUMMARY_NAME, summary)
    if "npz" in formats and state is not None:
        output.write_state(out_dir / output.STATE_NAME, state)
    return RunResult(summary=summary, reports=reports, final_state=state)


def integrate(state: WaveState, dt: float, n_steps: int, project_constraints: bool = False, cfl: float = DEFAULT_CFL) -> WaveState:
    """Final state after ``n_steps`` steps, without diagnostics."""
    for _, state in simulate(state, dt, n_steps, max(n_steps, 1), project_constraints, cfl):
        pass
    return state
