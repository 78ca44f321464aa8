# Domain models
from .environment import PropagationEnvironment
from .experiment import ExperimentConfig
from .schemas import AnalyticResult, CoverageQuery, ResultRow
from .simulation import Estimate, HexLayout, SimConfig, SinrSamples, Snapshot

__all__ = [
    "PropagationEnvironment",
    "ExperimentConfig",
    "AnalyticResult",
    "CoverageQuery",
    "ResultRow",
    "Estimate",
    "HexLayout",
    "SimConfig",
    "SinrSamples",
    "Snapshot",
]
