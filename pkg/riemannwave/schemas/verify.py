from typing import List, Optional

from pydantic import BaseModel, Field


class PropertyResult(BaseModel):
    name: str
    module: str
    mandatory: bool = True
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    samples: int = 1
    detail: str = ""


class VerifyRequest(BaseModel):
    seed: int = 0
    N: int = Field(default=256, ge=16)
    include_dynamics: bool = True


class VerifyReport(BaseModel):
    seed: int
    N: int
    passed: bool
    mandatory_failures: List[str]
    results: List[PropertyResult]
    elapsed: float

    def result(self, name: str) -> PropertyResult:
        for item in self.results:
            if item.name == name:
                return item
        raise KeyError(name)
