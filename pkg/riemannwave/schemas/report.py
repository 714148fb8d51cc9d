from typing import List, Optional

from pydantic import BaseModel

CSV_SCHEMA_VERSION = 1
CSV_MAX_J = 4

_LEVEL_COLUMNS = ("E", "frak", "cal", "phg_term", "c1", "c2", "f", "d", "h")
_SLICE_COLUMNS = (
    "t",
    "norm_L",
    "min_a1",
    "holo_zt",
    "holo_inv_za",
    "min_abs_za",
    "steepness",
    "b_zero_mode",
    "frak_e0_rhs",
    "frak_e0_explicit",
    "e1_proxy",
    "e3_proxy",
    "e1e3",
)


def _cell(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.17g}"


class ResidualRecord(BaseModel):
    holo_zt: float
    holo_inv_za: float
    min_a1: float
    min_abs_za: float
    steepness: float
    norm_L: float
    b_zero_mode: float
    a1_imag_residue: float


class EnergyLevel(BaseModel):
    j: int
    E: float
    frak: float
    cal: float
    phg_term: float
    c1: float
    c2: float
    f: float
    d: float
    h: float
    decomposition_gap: float
    imag_residue: float


class EnergyReport(BaseModel):
    t: float
    levels: List[EnergyLevel]
    frak_e0_rhs: Optional[float] = None
    frak_e0_explicit: float
    e1_proxy: Optional[float] = None
    e3_proxy: Optional[float] = None
    e1e3: Optional[float] = None
    residuals: ResidualRecord

    @staticmethod
    def csv_header() -> List[str]:
        header = list(_SLICE_COLUMNS)
        for j in range(CSV_MAX_J + 1):
            header.extend(f"{name}_{j}" for name in _LEVEL_COLUMNS)
        return header

    def csv_row(self) -> List[str]:
        r = self.residuals
        row = [
            _cell(self.t),
            _cell(r.norm_L),
            _cell(r.min_a1),
            _cell(r.holo_zt),
            _cell(r.holo_inv_za),
            _cell(r.min_abs_za),
            _cell(r.steepness),
            _cell(r.b_zero_mode),
            _cell(self.frak_e0_rhs),
            _cell(self.frak_e0_explicit),
            _cell(self.e1_proxy),
            _cell(self.e3_proxy),
            _cell(self.e1e3),
        ]
        by_j = {level.j: level for level in self.levels}
        for j in range(CSV_MAX_J + 1):
            level = by_j.get(j)
            row.extend(_cell(getattr(level, name) if level else None) for name in _LEVEL_COLUMNS)
        return row

    def level(self, j: int) -> EnergyLevel:
        for level in self.levels:
            if level.j == j:
                return level
        raise KeyError(j)


class RunSummary(BaseModel):
    name: str
    status: str
    exit_code: int
    message: str = ""
    seed: int = 0
    epsilon: float
    N: int
    L: float
    dt: float
    steps: int
    t_final: float
    reports: int
    wall_time: float
    min_a1: Optional[float] = None
    norm_L_initial: Optional[float] = None
    norm_L_max: Optional[float] = None
    max_holo_residual: Optional[float] = None
    final_residuals: Optional[ResidualRecord] = None
    max_rate_E: List[Optional[float]] = []
    max_rate_frak: List[Optional[float]] = []
    max_rate_cal: List[Optional[float]] = []
    max_cal_minus_E: List[Optional[float]] = []
    frak_e0_rhs_deviation: Optional[float] = None
    csv_schema_version: int = CSV_SCHEMA_VERSION


class SweepMember(BaseModel):
    epsilon: float
    period_factor: int
    exit_code: int
    status: str
    message: str = ""
    max_rate_E: List[Optional[float]] = []
    max_rate_frak: List[Optional[float]] = []
    max_rate_cal: List[Optional[float]] = []
    max_cal_minus_E: List[Optional[float]] = []


class SlopeFit(BaseModel):
    quantity: str
    j: int
    period_factor: int
    slope: Optional[float] = None
    half_width: Optional[float] = None
    n_points: int


class SweepResult(BaseModel):
    epsilons: List[float]
    period_factors: List[int]
    members: List[SweepMember]
    slopes: List[SlopeFit]
    exit_code: int

    def slope(self, quantity: str, j: int, period_factor: int = 1) -> SlopeFit:
        for fit in self.slopes:
            if (fit.quantity, fit.j, fit.period_factor) == (quantity, j, period_factor):
                return fit
        raise KeyError((quantity, j, period_factor))


class ConvergenceRow(BaseModel):
    parameter: str
    value: float
    error: Optional[float] = None
    observed_order: Optional[float] = None


class ConvergenceReport(BaseModel):
    t_final: float
    dt_rows: List[ConvergenceRow] = []
    n_rows: List[ConvergenceRow] = []
    dt_order: Optional[float] = None
