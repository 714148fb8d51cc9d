from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool

from riemannwave.core.config import settings
from riemannwave.core.exceptions import BadRequestException
from riemannwave.schemas.verify import VerifyReport, VerifyRequest
from riemannwave.services.verification import run_verification

router = APIRouter(
    prefix="/api/verify",
    tags=["verify"],
    responses={404: {"description": "Not found"}},
)


@router.post("/", response_model=VerifyReport)
async def verify(data: VerifyRequest):
    if data.N > settings.api_max_points:
        raise BadRequestException(detail=f"N must not exceed {settings.api_max_points}")
    if data.N & (data.N - 1):
        raise BadRequestException(detail="N must be a power of two")
    return await run_in_threadpool(run_verification, data.seed, data.N, data.include_dynamics)
