"""
Pytest configuration and fixtures for backend tests.
"""

import math

import pytest

from app.models.environment import (
    ExponentPathLoss,
    LognormalShadowing,
    ModifiedExponentPathLoss,
    NoShadowing,
    PropagationEnvironment,
)
from app.models.simulation import SimConfig

# one BS per disk of radius 500 m
DENSITY = 1.0 / (math.pi * 500.0 ** 2)
K_LINEAR = 0.01  # -20 dB


def make_env(**overrides) -> PropagationEnvironment:
    """Exponent path loss, gamma = 4, no shadowing, no noise, k = 1, omni."""
    gamma = overrides.pop("gamma", 4.0)
    params = {
        "density": DENSITY,
        "power_mw": 1.0,
        "pathloss": ExponentPathLoss(K=K_LINEAR, gamma=gamma),
        "shadowing": NoShadowing(),
    }
    params.update(overrides)
    return PropagationEnvironment(**params)


def omni_m_closed_form(T: float) -> float:
    """M for gamma = 4, k = 1, omni: 1 + sqrt(T) (pi/2 - arctan(1/sqrt(T)))."""
    s = math.sqrt(T)
    return 1.0 + s * (0.5 * math.pi - math.atan(1.0 / s))


@pytest.fixture
def env():
    return make_env()


@pytest.fixture
def lognormal_env():
    return make_env(shadowing=LognormalShadowing(sigma_db=8.0))


@pytest.fixture
def modified_env():
    return make_env(
        pathloss=ModifiedExponentPathLoss(K=K_LINEAR, gamma=4.0, R0=50.0),
        shadowing=LognormalShadowing(sigma_db=8.0),
    )


@pytest.fixture
def small_sim():
    # lambda pi R_g^2 = 100 BSs on average
    return SimConfig(region_radius_m=5000.0, n_snapshots=4000, seed=7)


BASE_DOCUMENT = """\
# worked example
DENSITY_PER_M2=1.2732395447351627e-06
NOISE_DBM=off
PATHLOSS_GAMMA=4
REUSE_K=1
SLOTS=3
SWEEP_NAME=threshold_db
SWEEP_START=-10
SWEEP_STOP=20
SWEEP_STEP=5
SIM_REGION_RADIUS_M=3000
SIM_SNAPSHOTS=300
SIM_SEED=11
"""


@pytest.fixture
def document():
    return BASE_DOCUMENT
