"""
Shared numerical kernel.

Special functions, adaptive quadrature on finite and semi-infinite
intervals, reproducible random streams and dB/linear conversions. Every
function here is pure; ``RngStream`` objects are single-owner.
"""

import logging
import math
import warnings
from typing import Any, Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special
from scipy.integrate import IntegrationWarning, quad

from app.core.errors import QuadratureError

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_SQRT2 = math.sqrt(2.0)
# erfc underflows near 26.5; past this point Q goes through erfcx
_ERFC_TAIL = 5.0


class QuadratureSpec(BaseModel):
    """Tolerances for one adaptive integration."""

    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(default=0.0, ge=0.0)
    rel_tol: float = Field(default=1e-8, gt=0.0)
    max_subdivisions: int = Field(default=2000, gt=0)

    @model_validator(mode="after")
    def _check_tolerances(self) -> "QuadratureSpec":
        if self.abs_tol == 0.0 and self.rel_tol == 0.0:
            raise ValueError("abs_tol and rel_tol cannot both be zero")
        return self

    def tolerance_for(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))

    def tightened(self, factor: float = 10.0) -> "QuadratureSpec":
        return QuadratureSpec(
            abs_tol=self.abs_tol / factor,
            rel_tol=self.rel_tol / factor,
            max_subdivisions=self.max_subdivisions,
        )


DEFAULT_QUADRATURE = QuadratureSpec()


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

def q_function(x):
    """Standard normal tail probability Q(x) = P(Z > x), positive down to the subnormal range."""
    z = np.asarray(x, dtype=float) / _SQRT2
    far = np.maximum(z, _ERFC_TAIL)
    with np.errstate(under="ignore"):
        tail = special.erfcx(far) * np.exp(-far * far)
    return (0.5 * np.where(z > _ERFC_TAIL, tail, special.erfc(z)))[()]


def scaled_q_function(x):
    """e^{x^2/2} Q(x), finite for all real x where the product is."""
    return 0.5 * special.erfcx(np.asarray(x, dtype=float) / _SQRT2)[()]


def binomial(n: int, m: int) -> int:
    """Exact binomial coefficient n choose m."""
    return int(special.comb(n, m, exact=True))


def compensated_sum(values: Iterable[float]) -> float:
    """Sum with exact rounding; used for alternating series."""
    return math.fsum(values)


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------

def db_to_linear(x_db):
    return np.power(10.0, np.asarray(x_db, dtype=float) / 10.0)[()]


def dbm_to_mw(x_dbm):
    return db_to_linear(x_dbm)


def linear_to_db(x):
    return (10.0 * np.log10(np.asarray(x, dtype=float)))[()]


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def _sample_integrand(f: Callable[[float], float], a: float, b: float, count: int = 9) -> Dict[str, Any]:
    abscissae = np.linspace(a, b, count + 2)[1:-1]
    samples = []
    for x in abscissae:
        try:
            samples.append(float(f(float(x))))
        except Exception:  # diagnostics only
            samples.append(float("nan"))
    return {"abscissae": abscissae.tolist(), "integrand": samples}


def _adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec,
    points: Optional[Sequence[float]] = None,
) -> Tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        out = quad(
            f,
            a,
            b,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            points=points,
            full_output=1,
        )
    value, error = float(out[0]), float(out[1])
    if len(out) > 3:
        message = str(out[3])
        if not (math.isfinite(value) and error <= spec.tolerance_for(value)):
            raise QuadratureError(
                f"quadrature on [{a}, {b}] did not converge: {message.splitlines()[0]}",
                estimate=value,
                error=error,
                diagnostics=_sample_integrand(f, a, b),
            )
        logger.debug(f"QUADPACK flagged [{a}, {b}] but error {error:.3g} meets tolerance")
    return value, error


def integrate_finite(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    points: Optional[Sequence[float]] = None,
) -> Tuple[float, float]:
    """Adaptive Gauss-Kronrod quadrature on [a, b] with optional breakpoints."""
    if b <= a:
        return 0.0, 0.0
    inner = None
    if points is not None:
        inner = sorted(p for p in points if a < p < b) or None
    return _adaptive(f, a, b, spec, inner)


def integrate_semi_infinite(
    f: Callable[[float], float],
    a: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> Tuple[float, float]:
    """
    Integrate f over (a, inf).

    The interval is mapped onto (0, 1) with x = a + t/(1-t), dx = dt/(1-t)^2,
    and the mapped integrand is subdivided adaptively. Both exponential and
    power-law tails become bounded or integrably singular at t = 1.
    """

    def mapped(t: float) -> float:
        one_minus = 1.0 - t
        value = f(a + t / one_minus)
        if value == 0.0:
            return 0.0
        return value / (one_minus * one_minus)

    return _adaptive(mapped, 0.0, 1.0, spec)


def integrate_real_line(
    f: Callable[[float], float],
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> Tuple[float, float]:
    """Integrate f over the whole real line as two semi-infinite halves."""
    right, right_err = integrate_semi_infinite(f, 0.0, spec)
    left, left_err = integrate_semi_infinite(lambda x: f(-x), 0.0, spec)
    return right + left, right_err + left_err


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

class RngStream:
    """
    Reproducible random stream keyed by (seed, stream_index).

    Backed by the counter-based Philox generator; the key is derived with
    ``SeedSequence(seed, spawn_key=(stream_index, *path))`` so any stream
    can be rebuilt from its indices without touching its neighbours.
    Normal draws use numpy's ziggurat transform of the Philox output.
    """

    def __init__(self, seed: int, stream_index: int, path: Tuple[int, ...] = ()):
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        self.path = tuple(int(p) for p in path)
        sequence = np.random.SeedSequence(
            entropy=self.seed & _MASK64,
            spawn_key=(self.stream_index & _MASK64, *(p & _MASK64 for p in self.path)),
        )
        self._generator = np.random.Generator(np.random.Philox(sequence))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_index={self.stream_index}, path={self.path})"

    def substream(self, *keys: int) -> "RngStream":
        """Child stream; independent of this one and of its siblings."""
        return RngStream(self.seed, self.stream_index, self.path + tuple(keys))

    def uniform(self, size=None):
        """Uniforms on [0, 1)."""
        return self._generator.random(size)

    def exponential(self, rate: float, size=None):
        """Exponentials with mean 1/rate."""
        return self._generator.exponential(1.0 / rate, size)

    def normal(self, size=None):
        return self._generator.standard_normal(size)

    def poisson(self, mean: float) -> int:
        return int(self._generator.poisson(mean))

    def integers(self, low: int, high: int, size=None):
        """Integers on [low, high)."""
        return self._generator.integers(low, high, size=size)


def rng_stream(seed: int, stream_index: int) -> RngStream:
    return RngStream(seed, stream_index)
