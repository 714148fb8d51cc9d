from typing import List, Optional

from pydantic import BaseModel


class RunEntry(BaseModel):
    name: str
    has_summary: bool
    has_results: bool


class RunsList(BaseModel):
    runs: List[RunEntry]


class RunReport(BaseModel):
    name: str
    schema_version: int
    rows: List[dict[str, Optional[float]]]
