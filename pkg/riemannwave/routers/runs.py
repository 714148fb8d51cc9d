from pathlib import Path

from fastapi import APIRouter
from fastapi import Path as PathParam

from riemannwave.core.config import settings
from riemannwave.core.exceptions import BadRequestException, NotFoundException
from riemannwave.schemas.report import CSV_SCHEMA_VERSION, RunSummary
from riemannwave.schemas.runs import RunEntry, RunReport, RunsList
from riemannwave.services import output

router = APIRouter(
    prefix="/api/runs",
    tags=["runs"],
    responses={404: {"description": "Not found"}},
)


def _run_dir(name: str) -> Path:
    root = Path(settings.results_dir).resolve()
    path = (root / name).resolve()
    if path.parent != root:
        raise BadRequestException(detail="Invalid run name")
    if not path.is_dir():
        raise NotFoundException(detail="Run not found")
    return path


@router.get("/", response_model=RunsList)
async def runs_list():
    root = Path(settings.results_dir)
    if not root.is_dir():
        return RunsList(runs=[])
    runs = [
        RunEntry(
            name=path.name,
            has_summary=(path / output.SUMMARY_NAME).is_file(),
            has_results=(path / output.CSV_NAME).is_file(),
        )
        for path in sorted(root.iterdir())
        if path.is_dir()
    ]
    return RunsList(runs=runs)


@router.get("/{name}/summary", response_model=RunSummary)
async def run_summary(name: str = PathParam(..., title="The name of the run directory")):
    path = _run_dir(name) / output.SUMMARY_NAME
    if not path.is_file():
        raise NotFoundException(detail="Summary not found")
    return RunSummary.model_validate_json(path.read_text(encoding="utf-8"))


@router.get("/{name}/report", response_model=RunReport)
async def run_report(name: str = PathParam(..., title="The name of the run directory")):
    path = _run_dir(name) / output.CSV_NAME
    if not path.is_file():
        raise NotFoundException(detail="Results not found")
    try:
        rows = output.read_report_rows(path)
    except ValueError:
        raise BadRequestException(detail="Unreadable results file")
    return RunReport(name=name, schema_version=CSV_SCHEMA_VERSION, rows=rows)
