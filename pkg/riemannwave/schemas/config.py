import math
from typing import Literal, Optional, List

from pydantic import BaseModel, field_validator, model_validator


class GridConfig(BaseModel):
    N: int = 256
    L: float = 2 * math.pi

    class Config:
        extra = "forbid"

    @field_validator("N")
    @classmethod
    def power_of_two(cls, value: int) -> int:
        if value < 16 or value & (value - 1):
            raise ValueError("N must be a power of two and at least 16")
        return value

    @field_validator("L", mode="before")
    @classmethod
    def parse_period(cls, value):
        if isinstance(value, str) and value.strip().endswith("pi"):
            factor = value.strip()[:-2].strip().rstrip("*") or "1"
            return float(factor) * math.pi
        return value

    @field_validator("L")
    @classmethod
    def positive_period(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("L must be positive")
        return value


class PhysicsConfig(BaseModel):
    epsilon: float = 0.05
    profile: Literal["single_mode", "packet", "custom"] = "single_mode"
    k0: int = 1
    k_center: float = 4.0
    width: float = 1.5
    coeffs: List[complex] = []

    class Config:
        extra = "forbid"

    @field_validator("epsilon")
    @classmethod
    def nonnegative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("epsilon must be >= 0")
        return value

    @field_validator("coeffs", mode="before")
    @classmethod
    def split_coeffs(cls, value):
        if isinstance(value, str):
            return [complex(item.strip().replace(" ", "")) for item in value.split(",") if item.strip()]
        return value

    @model_validator(mode="after")
    def profile_parameters(self):
        if self.profile == "single_mode" and self.k0 < 1:
            raise ValueError("single_mode needs k0 >= 1")
        if self.profile == "packet" and (self.k_center <= 0 or self.width <= 0):
            raise ValueError("packet needs positive k_center and width")
        if self.profile == "custom" and not self.coeffs:
            raise ValueError("custom profile needs coeffs")
        return self


class SteppingConfig(BaseModel):
    dt: Optional[float] = None
    cfl: Optional[float] = None
    T_final: float = 1.0
    filter: Literal["none", "krasny", "smooth36"] = "none"
    filter_threshold: float = 1e-13
    project_constraints: bool = False

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def step_size(self):
        if self.dt is None and self.cfl is None:
            raise ValueError("missing dt and cfl")
        if self.dt is not None and self.cfl is not None:
            raise ValueError("give dt or cfl, not both")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.cfl is not None and self.cfl <= 0:
            raise ValueError("cfl must be positive")
        if self.T_final < 0:
            raise ValueError("T_final must be >= 0")
        return self


class DiagnosticsConfig(BaseModel):
    max_j: int = 2
    jet_order: Optional[int] = None
    report_every: int = 1

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def orders(self):
        if not 0 <= self.max_j <= 4:
            raise ValueError("max_j must lie in [0, 4]")
        if self.jet_order is None:
            self.jet_order = max(self.max_j + 2, 4)
        if not self.max_j + 2 <= self.jet_order <= 6:
            raise ValueError("jet_order must lie in [max_j + 2, 6]")
        if self.report_every < 1:
            raise ValueError("report_every must be >= 1")
        return self


class OutputConfig(BaseModel):
    directory: str = "results/run"
    formats: List[Literal["csv", "json", "npz"]] = ["csv", "json", "npz"]

    class Config:
        extra = "forbid"

    @field_validator("formats", mode="before")
    @classmethod
    def split_formats(cls, value):
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value


class RunConfig(BaseModel):
    seed: int = 0
    grid: GridConfig = GridConfig()
    physics: PhysicsConfig = PhysicsConfig()
    stepping: SteppingConfig
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    output: OutputConfig = OutputConfig()

    class Config:
        extra = "forbid"
