from typing import Any
from fastapi import HTTPException, status


class BadRequestException(HTTPException):
    def __init__(self, detail: Any = None) -> None:
        super().__init__(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=detail if detail else "Bad request",
        )


class NotFoundException(HTTPException):
    def __init__(self, detail: Any = None) -> None:
        super().__init__(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=detail if detail else "Not found",
        )


class RiemannWaveError(Exception):
    """Base of every domain failure; `exit_code` is what the CLI returns."""

    default_detail = "simulation error"
    exit_code = 1

    def __init__(self, detail: Any = None) -> None:
        self.detail = detail if detail else self.default_detail
        super().__init__(self.detail)


class GridMismatchError(RiemannWaveError):
    default_detail = "grid mismatch"


class NonzeroMeanError(RiemannWaveError):
    default_detail = "nonzero mean"


class KernelSpecError(RiemannWaveError):
    default_detail = "insufficient diff factors"


class JetOrderError(RiemannWaveError):
    default_detail = "insufficient jet order"


class ChordArcError(RiemannWaveError):
    default_detail = "chord-arc failure"
    exit_code = 2


class SteepnessError(RiemannWaveError):
    default_detail = "steepness bound violated"


class TimeStepError(RiemannWaveError):
    default_detail = "time step exceeds CFL bound"


class ConfigError(RiemannWaveError):
    default_detail = "config parse error"
    exit_code = 1

    def __init__(self, detail: Any = None, line: int | None = None, key: str | None = None) -> None:
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        detail = detail if detail else self.default_detail
        super().__init__(f"{', '.join(where)}: {detail}" if where else detail)


class BlowUpError(RiemannWaveError):
    default_detail = "blow-up detected"
    exit_code = 2

    def __init__(self, t: float, detail: Any = None) -> None:
        self.t = t
        super().__init__(f"{detail if detail else self.default_detail} at t={t:.6g}")


class ConstraintBreachError(RiemannWaveError):
    default_detail = "constraint residual breach"
    exit_code = 3


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOW_UP = 2
EXIT_CONSTRAINT = 3
EXIT_SWEEP_PARTIAL = 4
