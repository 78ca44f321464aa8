"""
Configuration management using Pydantic Settings.
Loads process-level configuration from environment variables.

Per-experiment parameters (densities, path loss, sweeps) live in experiment
documents parsed by ``app.services.config_service``; this module only holds
what is shared by every run: tolerances, worker counts, logging, server.
"""

from typing import List

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.numerics import QuadratureSpec


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Application
    environment: str = "development"
    allowed_origins: str = Field(default="http://localhost:3000,http://localhost:5173")

    # Quadrature (outermost integrals)
    quad_abs_tol: float = Field(default=0.0, ge=0.0)
    quad_rel_tol: float = Field(default=1e-8, gt=0.0)
    quad_max_subdivisions: int = Field(default=2000, gt=0)

    # Quadrature for integrals nested inside another integral
    inner_quad_abs_tol: float = Field(default=1e-14, ge=0.0)
    inner_quad_rel_tol: float = Field(default=1e-10, gt=0.0)

    # Simulation
    mc_workers: int = Field(default=1, ge=1)
    sweep_workers: int = Field(default=1, ge=1)
    default_seed: int = 20100101
    default_region_radius_m: float = Field(default=10_000.0, gt=0.0)
    default_snapshots: int = Field(default=10_000, gt=0)

    # Inclusion-exclusion over slots
    max_handover_slots: int = Field(default=20, ge=1)

    # Server
    host: str = "0.0.0.0"
    port: int = 8001

    # Logging
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", case_sensitive=False, extra="ignore"
    )

    @property
    def allowed_origins_list(self) -> List[str]:
        """Parse allowed origins from comma-separated string."""
        return [origin.strip() for origin in self.allowed_origins.split(",")]

    def quadrature_spec(self) -> QuadratureSpec:
        """Tolerances for top-level integrals."""
        return QuadratureSpec(
            abs_tol=self.quad_abs_tol,
            rel_tol=self.quad_rel_tol,
            max_subdivisions=self.quad_max_subdivisions,
        )

    def inner_quadrature_spec(self) -> QuadratureSpec:
        """Tighter tolerances for integrals evaluated inside another integrand."""
        return QuadratureSpec(
            abs_tol=self.inner_quad_abs_tol,
            rel_tol=self.inner_quad_rel_tol,
            max_subdivisions=self.quad_max_subdivisions,
        )


# Global settings instance
settings = Settings()
