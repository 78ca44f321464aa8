"""
FastAPI application entry point.
"""

import logging
import os

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app import __version__
from app.api.coverage import router as coverage_router
from app.core.config import settings
from app.core.logging_config import configure_logging

configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="Poisson Coverage API",
    description="Outage and handover probabilities of Poisson cellular networks",
    version=__version__,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.allowed_origins_list,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(coverage_router, prefix="/api")


@app.get("/health")
async def health_check():
    """Minimal health check endpoint."""
    return {"status": "healthy", "version": __version__}


if __name__ == "__main__":
    import uvicorn

    port = int(os.getenv("PORT", settings.port))
    logger.info(f"starting server on {settings.host}:{port}")
    uvicorn.run(app, host=settings.host, port=port)
