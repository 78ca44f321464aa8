"""
Monte Carlo engine for the Poisson network.

A snapshot fixes everything that is static during the study period: BS
positions, shadowing, reuse marks and the beam direction of every BS.
Only Rayleigh fading is redrawn per slot. The mobile sits at the origin.

Randomness is keyed per snapshot: snapshot i uses ``rng_stream(seed, i)``,
its geometry the substream ``(0, attempt)`` and slot l the substream
``(1, l)``. Results therefore depend on (seed, config) only, never on
the worker count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.numerics import RngStream, rng_stream
from app.models.environment import ModifiedExponentPathLoss, PropagationEnvironment
from app.models.simulation import Estimate, SimConfig, SinrSamples, Snapshot
from app.services import propagation_service as prop

logger = logging.getLogger(__name__)

GEOMETRY_KEY = 0
SLOT_KEY = 1
CHUNKS_PER_WORKER = 4


def snapshot_stream(seed: int, index: int) -> RngStream:
    return rng_stream(seed, index)


def interference_weights(env: PropagationEnvironment, snap: Snapshot) -> np.ndarray:
    """Per-interferer factor 1{e_i = e_0} a(theta_i) / xi_i multiplying r_i."""
    if snap.xi.size == 0:
        return np.zeros(0)
    a = np.asarray(prop.gain_a(env.beam, snap.theta), dtype=float)
    return np.where(snap.co_channel, a / snap.xi, 0.0)


def exterior_interference(env: PropagationEnvironment, radius: float) -> float:
    """
    Mean co-channel interference at the origin from BSs beyond ``radius``:
    (lambda_B / k) E(r) E(a) P E(H) 2 pi times the integral of L(r) r dr
    from ``radius`` to infinity.
    """
    pl = env.pathloss
    gamma = pl.gamma
    edge = max(radius, pl.R0) if isinstance(pl, ModifiedExponentPathLoss) else radius
    radial = pl.K * edge ** (2.0 - gamma) / (gamma - 2.0)
    if edge > radius:
        # flat part of the modified model between radius and R0
        radial += 0.5 * pl.K * edge ** -gamma * (edge * edge - radius * radius)
    per_bs = env.power_mw * prop.fractional_moment(env.shadowing, 1.0) * prop.mean_gain(env.beam) / env.mu
    return env.density / env.reuse_k * per_bs * 2.0 * math.pi * radial


def exterior_bias_bound(env: PropagationEnvironment, radius: float) -> float:
    """
    mu beta* times the exterior interference: the outage exponent a unit
    threshold loses at the typical serving inverse gain when BSs beyond
    ``radius`` are dropped.
    """
    return env.mu * prop.characteristic_scale(env) * exterior_interference(env, radius)


def build_snapshot(
    env: PropagationEnvironment,
    positions: np.ndarray,
    shadowing: np.ndarray,
    marks: np.ndarray,
    theta: np.ndarray,
    co_channel: Optional[np.ndarray] = None,
    resamples: int = 0,
) -> Snapshot:
    """
    Attach the mobile at the origin to its best server among BSs at
    ``positions`` and split the rest into interferers. Co-channel flags
    default to equality of reuse marks with the serving mark.
    """
    distances = np.hypot(positions[:, 0], positions[:, 1])
    gain = shadowing * np.asarray(prop.pathloss_gain(env.pathloss, distances)) * env.power_mw
    with np.errstate(divide="ignore"):
        xi = 1.0 / gain
    # argmin keeps the lowest index on ties
    serving = int(np.argmin(xi))
    others = np.arange(xi.size) != serving
    if co_channel is None:
        co_channel = marks == marks[serving]
    return Snapshot(
        xi0=float(xi[serving]),
        mark0=int(marks[serving]),
        xi=xi[others],
        theta=theta[others],
        co_channel=np.asarray(co_channel)[others],
        bs_count=int(xi.size),
        serving_index=serving,
        positions=positions,
        resamples=resamples,
    )


def sample_snapshot(env: PropagationEnvironment, sim: SimConfig, stream: RngStream) -> Snapshot:
    """One realization of the network within B(o, R_g)."""
    radius = sim.region_radius_m
    mean_count = env.density * math.pi * radius * radius
    attempt = 0
    while True:
        geometry = stream.substream(GEOMETRY_KEY, attempt)
        count = geometry.poisson(mean_count)
        if count > 0:
            break
        attempt += 1
        logger.info(f"empty region realization in {stream!r}; resampling (attempt {attempt})")

    r = radius * np.sqrt(geometry.uniform(count))
    phi = 2.0 * math.pi * geometry.uniform(count)
    positions = np.column_stack((r * np.cos(phi), r * np.sin(phi)))
    shadowing = prop.sample_shadowing(env.shadowing, geometry, count)
    marks = geometry.integers(1, env.reuse_k + 1, count)
    theta = 2.0 * math.pi * geometry.uniform(count) - math.pi
    return build_snapshot(env, positions, shadowing, marks, theta, resamples=attempt)


def _sinr(
    env: PropagationEnvironment, xi0: float, weights: np.ndarray, stream: RngStream, exterior: float = 0.0
) -> float:
    # serving fading is drawn before the interferers'
    r0 = stream.exponential(env.mu)
    fading = stream.exponential(env.mu, weights.size)
    interference = float(np.dot(weights, fading)) + exterior
    with np.errstate(divide="ignore"):
        signal = np.float64(r0) / np.float64(xi0)
        return float(signal / np.float64(env.noise_mw + interference))


def sinr_slot(env: PropagationEnvironment, snap: Snapshot, stream: RngStream, exterior: float = 0.0) -> float:
    """SINR of one slot with fresh fading; +inf without noise and interference."""
    return _sinr(env, snap.xi0, interference_weights(env, snap), stream, exterior)


def slot_sinrs(
    env: PropagationEnvironment, snap: Snapshot, stream: RngStream, n_slots: int, exterior: float = 0.0
) -> np.ndarray:
    """SINR of slots 0..n_slots-1 of one snapshot; ``exterior`` is added to every slot's interference."""
    weights = interference_weights(env, snap)
    return np.array(
        [_sinr(env, snap.xi0, weights, stream.substream(SLOT_KEY, l), exterior) for l in range(n_slots)]
    )


def run_snapshots(
    n_snapshots: int,
    n_slots: int,
    draw: Callable[[int], Tuple[Snapshot, np.ndarray]],
    workers: int,
) -> SinrSamples:
    """
    Evaluate ``draw`` for every snapshot index, in contiguous chunks.
    ``ThreadPoolExecutor.map`` returns chunks in submission order.
    """
    workers = max(1, int(workers))
    n_chunks = min(n_snapshots, workers * CHUNKS_PER_WORKER)
    bounds = np.linspace(0, n_snapshots, n_chunks + 1).astype(int)
    chunks = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]

    def run_chunk(chunk: Tuple[int, int]):
        xi0 = np.empty(chunk[1] - chunk[0])
        sinr = np.empty((chunk[1] - chunk[0], n_slots))
        counts = np.empty(chunk[1] - chunk[0], dtype=int)
        resamples = 0
        for row, index in enumerate(range(*chunk)):
            snap, values = draw(index)
            xi0[row] = snap.xi0
            sinr[row] = values
            counts[row] = snap.bs_count
            resamples += snap.resamples
        return xi0, sinr, counts, resamples

    if workers == 1:
        parts = [run_chunk(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, chunks))

    return SinrSamples(
        xi0=np.concatenate([p[0] for p in parts]),
        sinr=np.vstack([p[1] for p in parts]),
        bs_count=np.concatenate([p[2] for p in parts]),
        resamples=sum(p[3] for p in parts),
    )


def estimate_from_sinrs(samples: SinrSamples, T: float, n: int = 1) -> Estimate:
    """Fraction of snapshots in outage (SINR < T) in each of the first n slots."""
    if not 1 <= n <= samples.n_slots:
        raise ValueError(f"n={n} outside the {samples.n_slots} simulated slots")
    outage = np.all(samples.sinr[:, :n] < T, axis=1)
    return Estimate.from_count(int(np.count_nonzero(outage)), samples.n_snapshots)


class MonteCarloService:
    """Poisson-network estimators built on a shared SINR sample."""

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers or settings.mc_workers

    def simulate_sinrs(
        self, env: PropagationEnvironment, sim: SimConfig, n_slots: int = 1, workers: Optional[int] = None
    ) -> SinrSamples:
        """SINR for n_slots slots of every snapshot; reusable across thresholds."""
        if n_slots < 1:
            raise ValueError(f"n_slots must be positive, got {n_slots}")
        exterior = self.exterior_term(env, sim)
        logger.info(
            f"simulating {sim.n_snapshots} snapshots x {n_slots} slots "
            f"(lambda={env.density:.3g}/m^2, R_g={sim.region_radius_m:g} m, seed={sim.seed}, "
            f"exterior={sim.exterior}:{exterior:.3g} mW)"
        )

        def draw(index: int):
            stream = snapshot_stream(sim.seed, index)
            snap = sample_snapshot(env, sim, stream)
            return snap, slot_sinrs(env, snap, stream, n_slots, exterior)

        samples = run_snapshots(sim.n_snapshots, n_slots, draw, workers or self.workers)
        if samples.resamples:
            logger.info(f"{samples.resamples} empty region realizations were resampled")
        return samples

    def exterior_term(self, env: PropagationEnvironment, sim: SimConfig) -> float:
        """Interference added to every slot for the BSs beyond R_g."""
        if sim.exterior == "mean":
            return exterior_interference(env, sim.region_radius_m)
        bound = exterior_bias_bound(env, sim.region_radius_m)
        if bound > sim.bias_tolerance:
            raise ValueError(
                f"R_g={sim.region_radius_m:g} m drops exterior interference with bias bound {bound:.3g} "
                f"above the tolerance {sim.bias_tolerance:g}; enlarge the region or use exterior='mean'"
            )
        return 0.0

    def estimate_outage(self, env: PropagationEnvironment, sim: SimConfig, T: float) -> Estimate:
        return estimate_from_sinrs(self.simulate_sinrs(env, sim, 1), T, 1)

    def estimate_handover(self, env: PropagationEnvironment, sim: SimConfig, T: float, n: int) -> Estimate:
        return estimate_from_sinrs(self.simulate_sinrs(env, sim, n), T, n)

    def count_xi_below(self, env: PropagationEnvironment, sim: SimConfig, t_values: Sequence[float]) -> np.ndarray:
        """|Xi within [0, t]| per snapshot (rows) and t (columns)."""
        t = np.asarray(t_values, dtype=float)
        rows: List[np.ndarray] = []
        for index in range(sim.n_snapshots):
            snap = sample_snapshot(env, sim, snapshot_stream(sim.seed, index))
            rows.append(np.count_nonzero(snap.all_xi[:, None] <= t[None, :], axis=0))
        return np.vstack(rows)


# Global instance
montecarlo_service = MonteCarloService()
