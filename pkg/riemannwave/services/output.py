import csv
import logging
from pathlib import Path
from typing import Iterable, List

import numpy as np
from pydantic import BaseModel

from riemannwave.numerics.evolution import WaveState
from riemannwave.schemas.report import CSV_SCHEMA_VERSION, EnergyReport

logger = logging.getLogger(__name__)

CSV_NAME = "results.csv"
SUMMARY_NAME = "summary.json"
STATE_NAME = "final_state.npz"
SCHEMA_LINE = f"# riemannwave results schema={CSV_SCHEMA_VERSION}"


def ensure_dir(path: str | Path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


class ReportWriter:
    """Streams one CSV row per report slice, header first."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._file = self.path.open("w", encoding="utf-8", newline="")
        self._file.write(SCHEMA_LINE + "\n")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(EnergyReport.csv_header())

    def write(self, report: EnergyReport) -> None:
        self._writer.writerow(report.csv_row())

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "ReportWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_reports(path: str | Path, reports: Iterable[EnergyReport]) -> None:
    with ReportWriter(path) as writer:
        for report in reports:
            writer.write(report)


def read_report_rows(path: str | Path) -> List[dict]:
    """Rows of a results CSV as dicts; blank cells become None."""
    with Path(path).open(encoding="utf-8", newline="") as f:
        first = f.readline()
        if not first.startswith("# riemannwave results"):
            raise ValueError(f"{path} is not a results file")
        rows = []
        for row in csv.DictReader(f):
            rows.append({key: (float(value) if value else None) for key, value in row.items()})
    return rows


def write_json(path: str | Path, model: BaseModel) -> None:
    Path(path).write_text(model.model_dump_json(indent=2), encoding="utf-8")
    logger.info("wrote %s", path)


def write_state(path: str | Path, state: WaveState) -> None:
    np.savez(
        path,
        t=state.t,
        N=state.grid.N,
        L=state.grid.L,
        zeta=state.zeta.values,
        zt=state.zt.values,
    )


def write_table(path: str | Path, header: List[str], rows: Iterable[List]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if value is None else value for value in row])
