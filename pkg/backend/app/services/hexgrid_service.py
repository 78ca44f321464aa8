"""
Hexagonal-lattice baseline with planned frequency reuse.

Cells are indexed by axial coordinates (q, r); cell centres sit at
D (q + r/2, r sqrt(3)/2) with D = sqrt(3) R the distance between
neighbouring centres, so cells are pointy-top hexagons of corner radius
R. Co-channel cells form the sub-lattice spanned by the shift (i, j) and
its 60 degree rotation (-j, i + j), which has index k = i^2 + ij + j^2.

Snapshots reuse the Poisson engine's attachment and slot machinery; only
the BS positions and the frequency groups differ.
"""

import logging
import math
from typing import Dict, Literal, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import LayoutError
from app.core.numerics import RngStream
from app.models.environment import PropagationEnvironment
from app.models.simulation import Estimate, HexLayout, SimConfig, SinrSamples
from app.services import montecarlo_service as mc
from app.services import propagation_service as prop

logger = logging.getLogger(__name__)

HEX_KEY = 2
SQRT3 = math.sqrt(3.0)
# edge normals of a pointy-top hexagon
_NORMALS = np.array([[math.cos(a), math.sin(a)] for a in (0.0, math.pi / 3.0, 2.0 * math.pi / 3.0)])


def reuse_factor(i: int, j: int) -> int:
    return i * i + i * j + j * j


def shift_for_reuse(k: int) -> Optional[Tuple[int, int]]:
    """Tiling shift (i, j), i >= j >= 0, with i^2 + ij + j^2 = k; None if k admits none."""
    if k < 1:
        return None
    for i in range(1, math.isqrt(k) + 1):
        for j in range(0, i + 1):
            if reuse_factor(i, j) == k:
                return i, j
    return None


def cell_radius_for_density(density: float) -> float:
    """Corner radius R of a hexagon of area 1 / density."""
    return math.sqrt(2.0 / (3.0 * SQRT3 * density))


def _axial_cells(rings: int) -> np.ndarray:
    cells = [
        (q, r)
        for q in range(-rings, rings + 1)
        for r in range(-rings, rings + 1)
        if max(abs(q), abs(r), abs(q + r)) <= rings
    ]
    # centre first, then ring by ring
    cells.sort(key=lambda c: (max(abs(c[0]), abs(c[1]), abs(c[0] + c[1])), c))
    return np.array(cells, dtype=int)


def _frequency_groups(axial: np.ndarray, i: int, j: int) -> np.ndarray:
    """Group id per cell: its coset modulo the co-channel sub-lattice."""
    k = reuse_factor(i, j)
    q, r = axial[:, 0], axial[:, 1]
    fa = ((i + j) * q + j * r) // k
    fb = (-j * q + i * r) // k
    residue_q = q - (i * fa - j * fb)
    residue_r = r - (j * fa + (i + j) * fb)
    ids: Dict[Tuple[int, int], int] = {}
    groups = np.empty(axial.shape[0], dtype=int)
    for index, key in enumerate(zip(residue_q.tolist(), residue_r.tolist())):
        groups[index] = ids.setdefault(key, len(ids))
    return groups


def build_layout(density: float, rings: int, i: int, j: int) -> HexLayout:
    """All cells within ``rings`` rings of the centre cell, density matched to ``density``."""
    if density <= 0.0:
        raise LayoutError(f"density must be positive, got {density}")
    if i < 0 or j < 0 or (i == 0 and j == 0):
        raise LayoutError(f"shift (i, j) must be non-negative and not (0, 0), got ({i}, {j})")
    if rings < 0:
        raise LayoutError(f"rings must be non-negative, got {rings}")

    radius = cell_radius_for_density(density)
    spacing = SQRT3 * radius
    axial = _axial_cells(rings)
    q, r = axial[:, 0].astype(float), axial[:, 1].astype(float)
    positions = spacing * np.column_stack((q + 0.5 * r, 0.5 * SQRT3 * r))
    groups = _frequency_groups(axial, i, j)

    co_channel = int(np.count_nonzero(groups == groups[0])) - 1
    if co_channel == 0:
        raise LayoutError(f"{rings} rings hold no co-channel cell for shift ({i}, {j}); need at least {i + j}")
    if rings < 2 * (i + j):
        logger.warning(f"{rings} rings cover fewer than two co-channel tiers for shift ({i}, {j})")

    layout = HexLayout(
        cell_radius=radius,
        rings=rings,
        shift=(i, j),
        reuse_k=reuse_factor(i, j),
        positions=positions,
        groups=groups,
        axial=axial,
    )
    logger.debug(f"hex layout: {layout.n_cells} cells, {layout.n_groups} groups, R={radius:.1f} m")
    return layout


def inside_hexagon(points: np.ndarray, cell_radius: float) -> np.ndarray:
    """Membership in the centre hexagon for an (N, 2) array of points."""
    apothem = 0.5 * SQRT3 * cell_radius
    return np.all(np.abs(points @ _NORMALS.T) <= apothem, axis=-1)


def sample_ms_position(layout: HexLayout, stream: RngStream) -> np.ndarray:
    """Uniform point in the centre cell, by rejection from its bounding box."""
    half_width = 0.5 * layout.cell_spacing
    while True:
        u = stream.uniform(2)
        point = np.array([(2.0 * u[0] - 1.0) * half_width, (2.0 * u[1] - 1.0) * layout.cell_radius])
        if inside_hexagon(point[None, :], layout.cell_radius)[0]:
            return point


class HexGridService:
    """Monte Carlo estimators for the hexagonal baseline."""

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers or settings.mc_workers

    def sample_snapshot(self, layout: HexLayout, env: PropagationEnvironment, stream: RngStream):
        geometry = stream.substream(mc.GEOMETRY_KEY, 0)
        ms = sample_ms_position(layout, geometry)
        count = layout.n_cells
        shadowing = prop.sample_shadowing(env.shadowing, geometry, count)
        theta = 2.0 * math.pi * geometry.uniform(count) - math.pi
        # group ids play the role of reuse marks
        return mc.build_snapshot(env, layout.positions - ms, shadowing, layout.groups, theta)

    def simulate_hex_sinrs(
        self,
        layout: HexLayout,
        env: PropagationEnvironment,
        sim: SimConfig,
        n_slots: int = 1,
        workers: Optional[int] = None,
    ) -> SinrSamples:
        """SINR matrix of the hexagonal network; the environment's reuse_k is ignored."""
        if n_slots < 1:
            raise ValueError(f"n_slots must be positive, got {n_slots}")
        logger.info(
            f"simulating hexagonal network: {layout.n_cells} cells, k={layout.reuse_k}, "
            f"{sim.n_snapshots} snapshots x {n_slots} slots, seed={sim.seed}"
        )

        def draw(index: int):
            stream = mc.snapshot_stream(sim.seed, index).substream(HEX_KEY)
            snap = self.sample_snapshot(layout, env, stream)
            return snap, mc.slot_sinrs(env, snap, stream, n_slots)

        return mc.run_snapshots(sim.n_snapshots, n_slots, draw, workers or self.workers)

    def estimate_hex_metric(
        self,
        layout: HexLayout,
        env: PropagationEnvironment,
        sim: SimConfig,
        T: float,
        n: int = 1,
        metric: Literal["outage", "handover"] = "outage",
    ) -> Estimate:
        if metric not in ("outage", "handover"):
            raise ValueError(f"unknown metric '{metric}'")
        slots = 1 if metric == "outage" else n
        samples = self.simulate_hex_sinrs(layout, env, sim, slots)
        return mc.estimate_from_sinrs(samples, T, slots)


# Global instance
hexgrid_service = HexGridService()
