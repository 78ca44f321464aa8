"""
Experiment document model.

An experiment is one flat key-value document: the environment in user
units (dB, dBm, meters), exactly one sweep axis, the simulation window
and the optional hexagonal baseline. Defaults follow the usual
parameter table (K = -20 dB, P = 0 dBm, n_t = 8, mu = 1).
"""

import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_core import PydanticCustomError

from app.core.config import settings
from app.core.numerics import db_to_linear, dbm_to_mw
from app.models.environment import (
    ConventionalBeam,
    ExponentPathLoss,
    LognormalShadowing,
    ModifiedExponentPathLoss,
    NoShadowing,
    OmniBeam,
    PropagationEnvironment,
)
from app.models.simulation import SimConfig

SweepAxis = Literal["threshold_db", "gamma", "reuse_k", "slots"]
INTEGER_AXES = ("reuse_k", "slots")


def _invalid(key: str, reason: str) -> PydanticCustomError:
    """Cross-field error that still names the key it concerns."""
    return PydanticCustomError("invalid_experiment", "{key}: {reason}", {"key": key, "reason": reason})


class ExperimentConfig(BaseModel):
    """Validated experiment document."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Network
    density_per_m2: float = Field(gt=0.0)
    power_dbm: float = 0.0
    noise_dbm: Optional[float] = Field(description='noise power in dBm, or "off"')
    fading_mu: float = Field(default=1.0, gt=0.0)
    reuse_k: int = Field(default=1, ge=1)

    # Path loss
    pathloss_model: Literal["exponent", "modified_exponent"] = "exponent"
    pathloss_k_db: float = -20.0
    pathloss_gamma: float = Field(default=4.0, gt=2.0)
    pathloss_r0_m: Optional[float] = Field(default=None, gt=0.0)

    # Shadowing
    shadowing_model: Literal["none", "lognormal"] = "none"
    shadowing_sigma_db: float = Field(default=8.0, ge=0.0)

    # Beamforming
    beamforming_enabled: bool = False
    beamforming_nt: int = Field(default=8, ge=1)

    # Fixed query values, overridden by the sweep axis
    threshold_db: float = 10.0
    slots: int = Field(default=1, ge=1)

    # Sweep
    sweep_name: SweepAxis = "threshold_db"
    sweep_start: float = -10.0
    sweep_stop: float = 20.0
    sweep_step: float = Field(default=2.0, gt=0.0)

    # Simulation
    sim_region_radius_m: float = Field(default=settings.default_region_radius_m, gt=0.0)
    sim_snapshots: int = Field(default=settings.default_snapshots, gt=0)
    sim_seed: int = settings.default_seed
    sim_exterior: Literal["mean", "none"] = "mean"
    sim_bias_tolerance: float = Field(default=1e-3, gt=0.0)

    # Hexagonal baseline
    hex_enabled: bool = False
    hex_rings: int = Field(default=6, ge=1)
    hex_i: int = Field(default=2, ge=0)
    hex_j: int = Field(default=1, ge=0)

    output_path: Optional[str] = None

    @field_validator("noise_dbm", mode="before")
    @classmethod
    def _noise_off(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() == "off":
            return None
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        if self.pathloss_model == "modified_exponent" and self.pathloss_r0_m is None:
            raise _invalid("pathloss_r0_m", "required by the modified_exponent model")
        if self.sweep_stop < self.sweep_start:
            raise _invalid("sweep_stop", "must not be below sweep_start")
        if self.hex_i == 0 and self.hex_j == 0:
            raise _invalid("hex_i", "hex_i and hex_j cannot both be zero")
        hex_k = self.hex_i * self.hex_i + self.hex_i * self.hex_j + self.hex_j * self.hex_j
        if self.hex_enabled and self.sweep_name != "reuse_k" and self.reuse_k != hex_k:
            raise _invalid("reuse_k", f"must equal the hexagonal reuse factor {hex_k} of (hex_i, hex_j)")
        values = self.sweep_values()
        if self.sweep_name in INTEGER_AXES and any(v != math.floor(v) or v < 1 for v in values):
            raise _invalid("sweep_start", f"{self.sweep_name} sweep must run over positive integers")
        if self.sweep_name == "gamma" and values[0] <= 2.0:
            raise _invalid("sweep_start", "gamma sweep must stay above 2")
        return self

    # ------------------------------------------------------------------

    @property
    def power_mw(self) -> float:
        return float(dbm_to_mw(self.power_dbm))

    @property
    def noise_mw(self) -> float:
        return 0.0 if self.noise_dbm is None else float(dbm_to_mw(self.noise_dbm))

    def sweep_values(self) -> List[float]:
        """Grid start, start + step, ... up to stop (inclusive within rounding)."""
        count = int(math.floor((self.sweep_stop - self.sweep_start) / self.sweep_step + 1e-9)) + 1
        return [round(self.sweep_start + i * self.sweep_step, 12) for i in range(count)]

    def point(self, value: float) -> Dict[str, Any]:
        """Query parameters at one sweep value."""
        params: Dict[str, Any] = {
            "threshold_db": self.threshold_db,
            "gamma": self.pathloss_gamma,
            "reuse_k": self.reuse_k,
            "slots": self.slots,
        }
        params[self.sweep_name] = int(value) if self.sweep_name in INTEGER_AXES else float(value)
        return params

    def environment(self, gamma: Optional[float] = None, reuse_k: Optional[int] = None) -> PropagationEnvironment:
        gamma = self.pathloss_gamma if gamma is None else gamma
        K = float(db_to_linear(self.pathloss_k_db))
        if self.pathloss_model == "modified_exponent":
            pathloss = ModifiedExponentPathLoss(K=K, gamma=gamma, R0=self.pathloss_r0_m)
        else:
            pathloss = ExponentPathLoss(K=K, gamma=gamma)
        shadowing = (
            LognormalShadowing(sigma_db=self.shadowing_sigma_db)
            if self.shadowing_model == "lognormal"
            else NoShadowing()
        )
        beam = ConventionalBeam(n_t=self.beamforming_nt) if self.beamforming_enabled else OmniBeam()
        return PropagationEnvironment(
            density=self.density_per_m2,
            power_mw=self.power_mw,
            pathloss=pathloss,
            shadowing=shadowing,
            noise_mw=self.noise_mw,
            mu=self.fading_mu,
            reuse_k=self.reuse_k if reuse_k is None else reuse_k,
            beam=beam,
        )

    def sim_config(self, seed: Optional[int] = None, snapshots: Optional[int] = None) -> SimConfig:
        return SimConfig(
            region_radius_m=self.sim_region_radius_m,
            n_snapshots=snapshots or self.sim_snapshots,
            seed=self.sim_seed if seed is None else seed,
            exterior=self.sim_exterior,
            bias_tolerance=self.sim_bias_tolerance,
        )
