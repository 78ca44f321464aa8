"""
Monte Carlo data types: configuration, one spatial snapshot, the sampled
SINR matrix, estimates and the hexagonal layout.
"""

import math
from dataclasses import dataclass
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SimConfig(BaseModel):
    """
    Simulation window B(o, R_g) around the mobile and sample size.

    ``exterior`` selects how BSs beyond R_g enter: ``mean`` adds their mean
    co-channel interference to every slot, ``none`` drops them and requires
    the resulting bias bound to stay below ``bias_tolerance``.
    """

    model_config = ConfigDict(frozen=True)

    region_radius_m: float = Field(default=10_000.0, gt=0.0)
    n_snapshots: int = Field(default=10_000, gt=0)
    seed: int = 0
    exterior: Literal["mean", "none"] = "mean"
    bias_tolerance: float = Field(default=1e-3, gt=0.0)


@dataclass(frozen=True)
class Snapshot:
    """
    Everything static during the study period, seen from the mobile at the
    origin. Interferer arrays exclude the serving BS; ``xi0 <= xi`` holds
    elementwise. ``theta`` is the direction of each BS's own mobile
    relative to the direction of the observed one.
    """

    xi0: float
    mark0: int
    xi: np.ndarray
    theta: np.ndarray
    co_channel: np.ndarray
    bs_count: int
    serving_index: int
    positions: np.ndarray
    resamples: int = 0

    @property
    def all_xi(self) -> np.ndarray:
        return np.concatenate(([self.xi0], self.xi))


class Estimate(BaseModel):
    """Bernoulli estimate with its standard error."""

    mean: float = Field(ge=0.0, le=1.0)
    stderr: float = Field(ge=0.0)
    n: int = Field(gt=0)
    successes: int = Field(default=0, ge=0)

    @classmethod
    def from_count(cls, successes: int, n: int) -> "Estimate":
        mean = successes / n
        return cls(mean=mean, stderr=math.sqrt(mean * (1.0 - mean) / n), n=n, successes=successes)


@dataclass(frozen=True)
class SinrSamples:
    """SINR per snapshot and slot, shared by every threshold of a sweep."""

    xi0: np.ndarray
    sinr: np.ndarray
    bs_count: np.ndarray
    resamples: int = 0

    @property
    def n_snapshots(self) -> int:
        return int(self.sinr.shape[0])

    @property
    def n_slots(self) -> int:
        return int(self.sinr.shape[1])


@dataclass(frozen=True)
class HexLayout:
    """
    Hexagonal cells within ``rings`` rings of the centre cell. Cell i sits
    at ``positions[i]`` and uses frequency group ``groups[i]``; the centre
    cell is index 0 in group 0.
    """

    cell_radius: float
    rings: int
    shift: Tuple[int, int]
    reuse_k: int
    positions: np.ndarray
    groups: np.ndarray
    axial: np.ndarray

    @property
    def cell_spacing(self) -> float:
        return math.sqrt(3.0) * self.cell_radius

    @property
    def cell_area(self) -> float:
        return 1.5 * math.sqrt(3.0) * self.cell_radius ** 2

    @property
    def n_cells(self) -> int:
        return int(self.positions.shape[0])

    @property
    def n_groups(self) -> int:
        return int(np.unique(self.groups).size)
