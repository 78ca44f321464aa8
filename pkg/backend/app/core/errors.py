"""
Exception hierarchy for the coverage toolkit.
"""

from typing import Any, Dict, Optional


class CoverageError(Exception):
    """Base class for every error raised by the toolkit."""

    def to_dict(self) -> Dict[str, Any]:
        return {"type": type(self).__name__, "error": str(self)}


class QuadratureError(CoverageError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(
        self,
        message: str,
        estimate: float,
        error: float,
        diagnostics: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.diagnostics = diagnostics or {}

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({"estimate": self.estimate, "error_bound": self.error})
        return data


class ConfigError(CoverageError):
    """Invalid experiment document; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["key"] = self.key
        return data


class LayoutError(CoverageError):
    """Hexagonal layout cannot be built as requested."""


class NotBracketedError(CoverageError):
    """A probability curve never crosses the requested level."""


class CancellationError(CoverageError):
    """Alternating inclusion-exclusion sum left the unit interval."""


class UnsupportedModelError(CoverageError):
    """Model combination outside the assumptions of the analytic formulas."""
