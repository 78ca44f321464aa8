"""
Propagation service: path loss, shadowing and beam-pattern models, and the
law of the path-loss-shadowing process Xi = {(h L(y) P)^-1}.

Xi is a Poisson process on (0, inf) with cumulative intensity lambda_B B(t);
everything the analytic engine needs about the network geometry goes
through B and its derivative.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import optimize, special

from app.core.config import settings
from app.core.numerics import (
    QuadratureSpec,
    RngStream,
    integrate_finite,
    integrate_semi_infinite,
)
from app.models.environment import (
    ConventionalBeam,
    ExponentPathLoss,
    LognormalShadowing,
    ModifiedExponentPathLoss,
    NoShadowing,
    OmniBeam,
    PropagationEnvironment,
)

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
_NULL_GUARD = 1e-9


# ---------------------------------------------------------------------------
# Beam pattern
# ---------------------------------------------------------------------------

def gain_a(beam, theta):
    """
    Interference reduction a(theta) in [0, 1] seen from a BS whose beam is
    steered at its own mobile (look direction 0).
    """
    theta = np.asarray(theta, dtype=float)
    if isinstance(beam, OmniBeam):
        return np.ones_like(theta)[()]

    n = beam.n_t
    phase = HALF_PI * np.sin(theta)
    denom = np.sin(phase)
    near_axis = np.abs(denom) < _NULL_GUARD
    safe = np.where(near_axis, 1.0, denom)
    value = np.sin(n * phase) ** 2 / (n * n * safe * safe)
    value = np.where(near_axis, 1.0, value)
    value = np.where(np.abs(theta) >= HALF_PI, 0.0, value)
    return np.clip(value, 0.0, 1.0)[()]


def beam_nulls(beam) -> list:
    """Angles in (0, pi/2) where the array factor vanishes."""
    if not isinstance(beam, ConventionalBeam):
        return []
    return [math.asin(2.0 * j / beam.n_t) for j in range(1, (beam.n_t + 1) // 2)]


def angular_kernel(beam, y: float, m: int = 1, spec: Optional[QuadratureSpec] = None) -> float:
    """
    Phi_m(y) = integral over theta in (-pi, pi) of 1 - (y / (y + a(theta)))^m.

    This is the angular part shared by D_m(beta) (with y = xi / (T beta))
    and by the M_m constants (with y = u^(gamma/2) / T).
    """
    if isinstance(beam, OmniBeam):
        return 2.0 * math.pi * _slot_kernel(1.0, y, m)

    spec = spec or settings.inner_quadrature_spec()

    def integrand(theta: float) -> float:
        return _slot_kernel(float(gain_a(beam, theta)), y, m)

    value, _ = integrate_finite(integrand, 0.0, HALF_PI, spec, points=beam_nulls(beam))
    # a(theta) is even and vanishes on the back half-plane
    return 2.0 * value


def _slot_kernel(a: float, y: float, m: int) -> float:
    """1 - (y / (y + a))^m, written to avoid cancellation when a << y."""
    if a <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    return -math.expm1(-m * math.log1p(a / y))


def mean_gain(beam, spec: Optional[QuadratureSpec] = None) -> float:
    """Average of a(theta) over theta uniform on (-pi, pi)."""
    if isinstance(beam, OmniBeam):
        return 1.0
    spec = spec or settings.inner_quadrature_spec()
    value, _ = integrate_finite(
        lambda theta: float(gain_a(beam, theta)), 0.0, HALF_PI, spec, points=beam_nulls(beam)
    )
    return value / math.pi


# ---------------------------------------------------------------------------
# Path loss and shadowing
# ---------------------------------------------------------------------------

def pathloss_gain(model, r):
    """L(r) for a BS at distance r."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        if isinstance(model, ModifiedExponentPathLoss):
            return (model.K * np.power(np.maximum(r, model.R0), -model.gamma))[()]
        return (model.K * np.power(r, -model.gamma))[()]


def is_degenerate(shadowing) -> bool:
    """True when H = 1 almost surely."""
    return isinstance(shadowing, NoShadowing) or (
        isinstance(shadowing, LognormalShadowing) and shadowing.sigma_db == 0.0
    )


def fractional_moment(shadowing, s: float) -> float:
    """E(H^s) for s in (0, 1]."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"fractional moment order must lie in (0, 1], got {s}")
    if is_degenerate(shadowing):
        return 1.0
    return math.exp(0.5 * (s * shadowing.sigma1) ** 2)


def shadowing_pdf(shadowing, t):
    """Density p_H; the degenerate model has no density and returns 0."""
    t = np.asarray(t, dtype=float)
    if is_degenerate(shadowing):
        return np.zeros_like(t)[()]
    sigma1 = shadowing.sigma1
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.log(t) / sigma1
        density = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * sigma1 * t)
    return np.where(t > 0.0, density, 0.0)[()]


def shadowing_ccdf(shadowing, t):
    """F_H(t) = P(H >= t)."""
    t = np.asarray(t, dtype=float)
    if is_degenerate(shadowing):
        return np.where(t <= 1.0, 1.0, 0.0)[()]
    with np.errstate(divide="ignore"):
        z = np.log(np.maximum(t, 0.0)) / shadowing.sigma1
    return special.ndtr(-z)[()]


def sample_shadowing(shadowing, stream: RngStream, size: int) -> np.ndarray:
    if is_degenerate(shadowing):
        return np.ones(size)
    return np.power(10.0, shadowing.sigma_db * stream.normal(size) / 10.0)


# ---------------------------------------------------------------------------
# B(beta) and B'(beta)
# ---------------------------------------------------------------------------

def exponent_coefficient(env: PropagationEnvironment) -> float:
    """C = pi (P K)^(2/gamma) E(H^(2/gamma)) of the exponent model."""
    pl = env.pathloss
    s = 2.0 / pl.gamma
    return math.pi * (env.power_mw * pl.K) ** s * fractional_moment(env.shadowing, s)


def _modified_threshold(env: PropagationEnvironment) -> float:
    """beta_0 = R0^gamma / (P K): inverse mean gain of a BS inside R0 with H = 1."""
    pl = env.pathloss
    return pl.R0 ** pl.gamma / (env.power_mw * pl.K)


def B_of(env: PropagationEnvironment, beta: float, method: str = "auto") -> float:
    """
    Expected number of BSs per unit density whose inverse mean gain is at
    most beta: B(beta) = integral over the plane of F_H((L(z) P beta)^-1).

    ``method="quadrature"`` evaluates the defining integral in polar
    coordinates instead of the closed forms (lognormal shadowing only; the
    degenerate model always uses its exact indicator form).
    """
    if beta <= 0.0:
        return 0.0
    if method == "quadrature" and not is_degenerate(env.shadowing):
        return _B_by_quadrature(env, beta)

    pl = env.pathloss
    s = 2.0 / pl.gamma
    if isinstance(pl, ExponentPathLoss):
        return exponent_coefficient(env) * beta ** s

    c1 = math.pi * (env.power_mw * pl.K) ** s
    threshold = _modified_threshold(env)
    if is_degenerate(env.shadowing):
        return c1 * beta ** s if beta >= threshold else 0.0
    sigma1 = env.shadowing.sigma1
    lower = math.log(threshold / beta) / sigma1
    # log of C1 beta^s e^{(s sigma1)^2/2} Q(lower - s sigma1), kept in logs
    # so extreme beta neither overflows nor underflows prematurely
    log_value = (
        math.log(c1)
        + s * math.log(beta)
        + 0.5 * (s * sigma1) ** 2
        + special.log_ndtr(-(lower - s * sigma1))
    )
    return math.exp(log_value)


def B_prime_of(env: PropagationEnvironment, beta: float, method: str = "auto") -> float:
    """Derivative of B; the intensity of Xi is lambda_B B'(t) dt."""
    if beta <= 0.0:
        raise ValueError(f"B' is defined for beta > 0, got {beta}")
    if method == "quadrature" and not is_degenerate(env.shadowing):
        return _B_prime_by_quadrature(env, beta)

    pl = env.pathloss
    s = 2.0 / pl.gamma
    if isinstance(pl, ExponentPathLoss):
        return s * exponent_coefficient(env) * beta ** (s - 1.0)

    threshold = _modified_threshold(env)
    smooth = s * B_of(env, beta) / beta
    if is_degenerate(env.shadowing):
        # absolutely continuous part; the atom at beta_0 carries pi R0^2
        return smooth
    # d/dbeta of the lower limit R0^gamma/(P K beta) contributes the
    # boundary term pi R0^2 p_H(beta_0/beta) beta_0 / beta^2
    boundary = math.pi * pl.R0 ** 2 * float(shadowing_pdf(env.shadowing, threshold / beta))
    return smooth + boundary * threshold / beta ** 2


def _radial_scale(env: PropagationEnvironment, beta: float) -> tuple:
    """Radius rho with K rho^-gamma P beta = 1, and R0 / rho (0 without R0)."""
    pl = env.pathloss
    rho = (env.power_mw * pl.K * beta) ** (1.0 / pl.gamma)
    v0 = pl.R0 / rho if isinstance(pl, ModifiedExponentPathLoss) else 0.0
    return rho, v0


def _B_by_quadrature(env: PropagationEnvironment, beta: float) -> float:
    # B = 2 pi rho^2 int_0^inf v F_H(max(v0, v)^gamma) dv, r = rho v
    spec = settings.inner_quadrature_spec()
    gamma = env.pathloss.gamma
    rho, v0 = _radial_scale(env, beta)

    def integrand(v: float) -> float:
        return v * float(shadowing_ccdf(env.shadowing, max(v0, v) ** gamma))

    inner, _ = integrate_finite(integrand, 0.0, v0, spec)
    outer, _ = integrate_semi_infinite(integrand, v0, spec)
    return 2.0 * math.pi * rho * rho * (inner + outer)


def _B_prime_by_quadrature(env: PropagationEnvironment, beta: float) -> float:
    # B' = beta^-2 int (L P)^-1 p_H((beta L P)^-1) dz
    #    = (2 pi rho^2 / beta) int_0^inf v w^gamma p_H(w^gamma) dv, w = max(v0, v)
    spec = settings.inner_quadrature_spec()
    gamma = env.pathloss.gamma
    rho, v0 = _radial_scale(env, beta)

    def integrand(v: float) -> float:
        w = max(v0, v) ** gamma
        return v * w * float(shadowing_pdf(env.shadowing, w))

    inner, _ = integrate_finite(integrand, 0.0, v0, spec)
    outer, _ = integrate_semi_infinite(integrand, v0, spec)
    return 2.0 * math.pi * rho * rho * (inner + outer) / beta


# ---------------------------------------------------------------------------
# Order statistics of Xi
# ---------------------------------------------------------------------------

def xi_ccdf(env: PropagationEnvironment, m: int, t: float) -> float:
    """
    P(xi_m > t): at most m points of Xi fall in [0, t], a Poisson count of
    mean lambda_B B(t).
    """
    if t <= 0.0:
        return 1.0
    return float(special.pdtr(m, env.density * B_of(env, t)))


def xi_pdf(env: PropagationEnvironment, m: int, t: float) -> float:
    """Density of xi_m: lambda_B B'(t) (lambda_B B)^m e^{-lambda_B B} / m!."""
    if t <= 0.0:
        return 0.0
    mean = env.density * B_of(env, t)
    log_poisson = special.xlogy(m, mean) - mean - special.gammaln(m + 1)
    return env.density * B_prime_of(env, t) * math.exp(log_poisson)


def characteristic_scale(env: PropagationEnvironment) -> float:
    """beta* with lambda_B B(beta*) = 1, the typical size of xi_0."""
    if env.is_exponent:
        return (1.0 / (env.density * exponent_coefficient(env))) ** (env.gamma / 2.0)

    def excess(log_beta: float) -> float:
        return env.density * B_of(env, math.exp(log_beta)) - 1.0

    # start from the no-shadowing exponent guess and widen until bracketed
    pl = env.pathloss
    guess = math.log((1.0 / (env.density * math.pi)) ** (pl.gamma / 2.0) / (env.power_mw * pl.K))
    lo, hi = guess - 2.0, guess + 2.0
    for _ in range(200):
        if excess(lo) < 0.0:
            break
        lo -= 2.0
    for _ in range(200):
        if excess(hi) > 0.0:
            break
        hi += 2.0
    return math.exp(optimize.brentq(excess, lo, hi, xtol=1e-12, rtol=1e-12))
