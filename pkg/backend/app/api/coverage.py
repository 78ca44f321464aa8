"""
Coverage API endpoints: analytic outage/handover for one parameter set and
full sweeps from an experiment document.
"""

import logging
from typing import List

from fastapi import APIRouter, HTTPException, status

from app.core.errors import CoverageError
from app.core.numerics import db_to_linear
from app.models.schemas import CoverageQuery, OutageRequest, OutageResponse, ResultRow, SweepRequest
from app.services.analytic_service import analytic_service
from app.services.config_service import parse_config
from app.services.sweep_service import run_sweep

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/coverage", tags=["coverage"])


def _unprocessable(exc: Exception) -> HTTPException:
    detail = exc.to_dict() if isinstance(exc, CoverageError) else {"type": type(exc).__name__, "error": str(exc)}
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=detail)


@router.post("/outage", response_model=OutageResponse)
def outage(request: OutageRequest):
    """Analytic outage and handover probabilities."""
    try:
        query = CoverageQuery(
            env=request.environment,
            T=float(db_to_linear(request.threshold_db)),
            n=request.slots,
        )
        p_outage = analytic_service.outage_probability(query, request.method)
        p_handover = analytic_service.handover_probability(query, request.method)
        constants = analytic_service.analytic_constants(query)
    except (CoverageError, ValueError) as exc:
        logger.error(f"outage request failed: {exc}")
        raise _unprocessable(exc)

    return OutageResponse(
        p_outage=p_outage.value,
        p_outage_error=p_outage.error,
        p_handover=p_handover.value,
        p_handover_error=p_handover.error,
        method=p_outage.method,
        constants=constants,
    )


@router.post("/sweep", response_model=List[ResultRow])
def sweep(request: SweepRequest):
    """Run the sweep described by an experiment document."""
    try:
        config = parse_config(request.document)
        return run_sweep(config, models=request.models)
    except (CoverageError, ValueError) as exc:
        logger.error(f"sweep request failed: {exc}")
        raise _unprocessable(exc)
