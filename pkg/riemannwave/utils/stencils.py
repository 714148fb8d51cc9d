import math
from typing import Sequence

import numpy as np
from scipy import stats


def time_derivative(series: Sequence[float], spacing: float) -> np.ndarray:
    """Fourth-order centered derivative at the interior samples 2 .. n-3."""
    f = np.asarray(series, dtype=float)
    if f.size < 5:
        return np.empty(0)
    return (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * spacing)


def max_abs_rate(series: Sequence[float], spacing: float) -> float | None:
    rates = time_derivative(series, spacing)
    if rates.size == 0 or not np.all(np.isfinite(rates)):
        return None
    return float(np.max(np.abs(rates)))


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> tuple[float | None, float | None]:
    """Least-squares slope of log y against log x with a 95% half-width.

    Points with non-positive y are dropped; fewer than two points give no slope.
    """
    pairs = [(a, b) for a, b in zip(x, y) if a and b and a > 0 and b > 0]
    if len(pairs) < 2:
        return None, None
    lx, ly = np.log([p[0] for p in pairs]), np.log([p[1] for p in pairs])
    fit = stats.linregress(lx, ly)
    if len(pairs) < 3:
        return float(fit.slope), None
    half_width = stats.t.ppf(0.975, len(pairs) - 2) * fit.stderr
    return float(fit.slope), float(half_width) if math.isfinite(half_width) else None


def observed_order(errors: Sequence[float], ratio: float = 2.0) -> float | None:
    """Convergence order from successive errors of a refinement by ``ratio``."""
    if len(errors) < 2 or errors[-1] <= 0 or errors[-2] <= 0:
        return None
    return math.log(errors[-2] / errors[-1]) / math.log(ratio)
