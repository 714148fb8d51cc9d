import logging
from contextlib import asynccontextmanager
from pathlib import Path

import uvicorn
from fastapi import FastAPI

from riemannwave.core.config import configure_logging, settings
from riemannwave.routers.runs import router as runs_router
from riemannwave.routers.verify import router as verify_router

configure_logging()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Function that handles startup and shutdown events.
    To understand more, read https://fastapi.tiangolo.com/advanced/events/
    """
    logger.info("serving results from %s", Path(settings.results_dir).resolve())
    yield


app = FastAPI(lifespan=lifespan, title=settings.project_name, docs_url="/api/docs")


@app.get("/")
async def root():
    return {"message": "riemannwave: water waves in the Riemann variable, energy diagnostics"}

# Routers
app.include_router(runs_router)
app.include_router(verify_router)


if __name__ == "__main__":
    uvicorn.run("riemannwave.main:app", host="0.0.0.0", reload=True, port=8000)
