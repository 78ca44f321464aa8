"""
Pydantic models for queries, results and API requests/responses.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.environment import PropagationEnvironment

ModelFamily = Literal["poisson_analytic", "poisson_mc", "hexagonal_mc"]
AnalyticMethod = Literal["auto", "reduced", "closed", "quadrature"]


class CoverageQuery(BaseModel):
    """One evaluation point: environment, SINR threshold T (linear), slots n."""

    model_config = ConfigDict(frozen=True)

    env: PropagationEnvironment
    T: float = Field(gt=0.0)
    n: int = Field(default=1, ge=1)


class AnalyticConstants(BaseModel):
    """Derived scalars of the exponent-model fast paths."""

    C: Optional[float] = None
    G: Optional[float] = None
    M: List[float] = Field(default_factory=list, description="M_1 .. M_n")


class AnalyticResult(BaseModel):
    value: float
    error: float = 0.0
    method: str


class ResultRow(BaseModel):
    model: ModelFamily
    sweep_name: str
    sweep_value: float
    threshold_db: float
    gamma: float
    reuse_k: int
    slots: int
    p_outage: Optional[float] = None
    p_outage_stderr: Optional[float] = None
    p_handover: Optional[float] = None
    p_handover_stderr: Optional[float] = None
    p_outage_quad_error: Optional[float] = None
    p_handover_quad_error: Optional[float] = None
    seed: Optional[int] = None
    error: str = ""


class GapReport(BaseModel):
    level: float
    reference_model: str
    baseline_model: str
    reference_threshold_db: float
    baseline_threshold_db: float
    gap_db: float


# API -----------------------------------------------------------------------

class OutageRequest(BaseModel):
    environment: PropagationEnvironment
    threshold_db: float
    slots: int = Field(default=1, ge=1)
    method: AnalyticMethod = "auto"


class OutageResponse(BaseModel):
    p_outage: float
    p_outage_error: float
    p_handover: float
    p_handover_error: float
    method: str
    constants: Optional[AnalyticConstants] = None


class SweepRequest(BaseModel):
    document: str
    models: Optional[List[ModelFamily]] = None
