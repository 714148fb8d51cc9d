import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from riemannwave.core.config import settings
from riemannwave.core.exceptions import EXIT_OK, EXIT_SWEEP_PARTIAL
from riemannwave.schemas.config import RunConfig
from riemannwave.schemas.report import SlopeFit, SweepMember, SweepResult
from riemannwave.services import output
from riemannwave.services.runner import run_simulation
from riemannwave.utils.stencils import loglog_slope

logger = logging.getLogger(__name__)

SWEEP_NAME = "sweep.json"
TABLE_NAME = "sweep.csv"
QUANTITIES = ("E", "frak", "cal", "cal_minus_E")


def ladder(eps0: float, ratio: float, count: int) -> List[float]:
    if count < 3:
        raise ValueError("an epsilon ladder needs at least 3 members")
    if not 0 < ratio < 1:
        raise ValueError("ladder ratio must lie in (0, 1)")
    return [eps0 * ratio**i for i in range(count)]


def _member(args: tuple[RunConfig, float, int]) -> SweepMember:
    config, epsilon, periods = args
    member_config = config.model_copy(deep=True)
    member_config.physics.epsilon = epsilon
    try:
        result = run_simulation(member_config, periods=periods, write=False)
    except ValueError as exc:
        return SweepMember(epsilon=epsilon, period_factor=periods, exit_code=1, status="failed", message=str(exc))
    s = result.summary
    return SweepMember(
        epsilon=epsilon,
        period_factor=periods,
        exit_code=s.exit_code,
        status=s.status,
        message=s.message,
        max_rate_E=s.max_rate_E,
        max_rate_frak=s.max_rate_frak,
        max_rate_cal=s.max_rate_cal,
        max_cal_minus_E=s.max_cal_minus_E,
    )


def _values(member: SweepMember, quantity: str) -> List[Optional[float]]:
    if quantity == "cal_minus_E":
        return member.max_cal_minus_E
    return getattr(member, f"max_rate_{quantity}")


def fit_slopes(members: Sequence[SweepMember], period_factors: Sequence[int], max_j: int) -> List[SlopeFit]:
    fits = []
    for periods in period_factors:
        ok = [m for m in members if m.period_factor == periods and m.exit_code == EXIT_OK]
        for quantity in QUANTITIES:
            for j in range(max_j + 1):
                xs = [m.epsilon for m in ok]
                ys = [_values(m, quantity)[j] if j < len(_values(m, quantity)) else None for m in ok]
                slope, half_width = loglog_slope(xs, ys)
                n_points = sum(1 for y in ys if y)
                fits.append(SlopeFit(quantity=quantity, j=j, period_factor=periods, slope=slope, half_width=half_width, n_points=n_points))
    return fits


def run_sweep(
    config: RunConfig,
    eps0: float,
    ratio: float,
    count: int,
    period_factors: Sequence[int] = (1,),
    workers: int | None = None,
    out_dir: str | Path | None = None,
) -> SweepResult:
    """Run every (epsilon, period) member and fit log-log slopes of the max rates."""
    epsilons = ladder(eps0, ratio, count)
    jobs = [(config, eps, periods) for periods in period_factors for eps in epsilons]
    workers = workers or settings.sweep_workers
    logger.info("sweep members=%d workers=%d", len(jobs), workers)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            members = list(pool.map(_member, jobs))
    else:
        members = [_member(job) for job in jobs]
    members.sort(key=lambda m: (m.period_factor, -m.epsilon))

    failed = [m for m in members if m.exit_code != EXIT_OK]
    for m in failed:
        logger.warning("sweep member epsilon=%.4g periods=%d failed: %s", m.epsilon, m.period_factor, m.message)
    result = SweepResult(
        epsilons=epsilons,
        period_factors=list(period_factors),
        members=members,
        slopes=fit_slopes(members, period_factors, config.diagnostics.max_j),
        exit_code=EXIT_SWEEP_PARTIAL if failed else EXIT_OK,
    )
    for fit in result.slopes:
        if fit.slope is not None:
            logger.info("slope %s_%d periods=%d: %.3f", fit.quantity, fit.j, fit.period_factor, fit.slope)

    if out_dir is not None:
        out_dir = output.ensure_dir(out_dir)
        output.write_json(out_dir / SWEEP_NAME, result)
        output.write_table(
            out_dir / TABLE_NAME,
            ["quantity", "j", "period_factor", "slope", "half_width", "n_points"],
            ([f.quantity, f.j, f.period_factor, f.slope, f.half_width, f.n_points] for f in result.slopes),
        )
    return result
