"""
Physical-layer models: path loss, shadowing, beam pattern and the full
propagation environment. All models are frozen (hashable) so they can key
memoised constants.
"""

import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


# Path loss -----------------------------------------------------------------

class ExponentPathLoss(_Frozen):
    """L(z) = K |z|^-gamma."""

    kind: Literal["exponent"] = "exponent"
    K: float = Field(gt=0.0, description="linear gain")
    gamma: float = Field(gt=2.0, description="path loss exponent")


class ModifiedExponentPathLoss(_Frozen):
    """L(z) = K max(R0, |z|)^-gamma, bounded above by K R0^-gamma."""

    kind: Literal["modified_exponent"] = "modified_exponent"
    K: float = Field(gt=0.0)
    gamma: float = Field(gt=2.0)
    R0: float = Field(gt=0.0, description="reference distance in meters")


PathLossModel = Annotated[
    Union[ExponentPathLoss, ModifiedExponentPathLoss], Field(discriminator="kind")
]


# Shadowing -----------------------------------------------------------------

class NoShadowing(_Frozen):
    """H = 1 almost surely; F_H(t) = 1 for t <= 1."""

    kind: Literal["none"] = "none"


class LognormalShadowing(_Frozen):
    """H = 10^(G/10) with G ~ N(0, sigma_db^2)."""

    kind: Literal["lognormal"] = "lognormal"
    sigma_db: float = Field(ge=0.0)

    @property
    def sigma1(self) -> float:
        """Standard deviation of ln H."""
        return self.sigma_db * math.log(10.0) / 10.0


ShadowingModel = Annotated[Union[NoShadowing, LognormalShadowing], Field(discriminator="kind")]


# Beam pattern --------------------------------------------------------------

class OmniBeam(_Frozen):
    kind: Literal["omni"] = "omni"


class ConventionalBeam(_Frozen):
    """n_t-element array steered at the served mobile, zero front-to-back ratio."""

    kind: Literal["conventional"] = "conventional"
    n_t: int = Field(default=8, ge=1)


BeamPattern = Annotated[Union[OmniBeam, ConventionalBeam], Field(discriminator="kind")]


# Environment ---------------------------------------------------------------

class PropagationEnvironment(_Frozen):
    """
    Everything static about the network, in linear units (mW, meters).

    The SINR threshold T and the slot count n are query parameters and are
    deliberately not part of the environment.
    """

    density: float = Field(gt=0.0, description="BS density lambda_B per m^2")
    power_mw: float = Field(default=1.0, gt=0.0)
    pathloss: PathLossModel
    shadowing: ShadowingModel = NoShadowing()
    noise_mw: float = Field(default=0.0, ge=0.0)
    mu: float = Field(default=1.0, gt=0.0, description="Rayleigh fading rate")
    reuse_k: int = Field(default=1, ge=1)
    beam: BeamPattern = OmniBeam()

    @property
    def gamma(self) -> float:
        return self.pathloss.gamma

    @property
    def is_exponent(self) -> bool:
        return isinstance(self.pathloss, ExponentPathLoss)

    @property
    def interference_limited(self) -> bool:
        return self.noise_mw == 0.0
