"""
Analytic outage and handover probabilities.

Coverage in m slots of one snapshot, conditioned on the serving inverse
gain xi_0 = beta, is

    exp(-m N T mu beta - lambda_B / (2 pi k) D_m(beta)),
    D_m(beta) = int dtheta int_beta^inf B'(xi) (1 - (1 / (1 + T beta a(theta) / xi))^m) dxi,

and q_m averages it against the density of xi_0. The outage probability
is 1 - q_1 and the handover probability follows by inclusion-exclusion
over the n slots. For the exponent path loss model the beta integral
collapses to int e^{-M_m alpha - m G alpha^(gamma/2)} d alpha, and to
1 / M_m without noise.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, List, Optional

from app.core.config import settings
from app.core.errors import CancellationError, QuadratureError, UnsupportedModelError
from app.core.numerics import (
    QuadratureSpec,
    binomial,
    compensated_sum,
    integrate_real_line,
    integrate_semi_infinite,
    scaled_q_function,
)
from app.models.environment import PropagationEnvironment
from app.models.schemas import AnalyticConstants, AnalyticResult, CoverageQuery
from app.services import propagation_service as prop

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
CANCELLATION_SLACK = 1e-9


@lru_cache(maxsize=4096)
def _interference_integral(
    T: float, gamma: float, beam, m: int, spec: QuadratureSpec, inner_spec: QuadratureSpec
) -> float:
    """J_m = int_1^inf Phi_m(u^(gamma/2) / T) du, so that M_m = 1 + J_m / (2 pi k)."""
    half_gamma = 0.5 * gamma

    def integrand(u: float) -> float:
        return prop.angular_kernel(beam, u ** half_gamma / T, m, inner_spec)

    value, _ = integrate_semi_infinite(integrand, 1.0, spec)
    return value


class AnalyticService:
    """Evaluates the coverage integrals with automatic dispatch to closed forms."""

    def __init__(self, spec: Optional[QuadratureSpec] = None, inner_spec: Optional[QuadratureSpec] = None):
        self.spec = spec or settings.quadrature_spec()
        self.inner_spec = inner_spec or settings.inner_quadrature_spec()

    # ------------------------------------------------------------------
    # Constants
    # ------------------------------------------------------------------

    def m_m_constant(self, k: int, T: float, gamma: float, beam, m: int = 1) -> float:
        """M_m(k, T, gamma); M = M_1."""
        if gamma <= 2.0:
            raise ValueError(f"gamma must exceed 2, got {gamma}")
        if T <= 0.0 or m < 1 or k < 1:
            raise ValueError(f"invalid arguments T={T}, m={m}, k={k}")
        return 1.0 + _interference_integral(T, gamma, beam, m, self.spec, self.inner_spec) / (TWO_PI * k)

    @staticmethod
    def noise_coefficient(env: PropagationEnvironment, T: float) -> float:
        """G = N T mu (lambda_B C)^(-gamma/2)."""
        if env.noise_mw == 0.0:
            return 0.0
        c = prop.exponent_coefficient(env)
        return env.noise_mw * T * env.mu * (env.density * c) ** (-0.5 * env.gamma)

    def analytic_constants(self, query: CoverageQuery, m_max: Optional[int] = None) -> AnalyticConstants:
        env = query.env
        m_max = m_max or query.n
        M = [self.m_m_constant(env.reuse_k, query.T, env.gamma, env.beam, m) for m in range(1, m_max + 1)]
        if not env.is_exponent:
            return AnalyticConstants(M=M)
        return AnalyticConstants(
            C=prop.exponent_coefficient(env), G=self.noise_coefficient(env, query.T), M=M
        )

    # ------------------------------------------------------------------
    # Conditional coverage
    # ------------------------------------------------------------------

    def d_of(self, env: PropagationEnvironment, beta: float, T: float, m: int = 1, method: str = "auto") -> float:
        """D_m(beta); D = D_1."""
        if beta <= 0.0 or T <= 0.0:
            raise ValueError(f"D is defined for beta > 0 and T > 0, got beta={beta}, T={T}")
        if env.is_exponent and method != "quadrature":
            j = _interference_integral(T, env.gamma, env.beam, m, self.spec, self.inner_spec)
            return prop.exponent_coefficient(env) * beta ** (2.0 / env.gamma) * j
        self._require_continuous(env)

        # xi = beta v, y = v / T
        def integrand(v: float) -> float:
            return prop.B_prime_of(env, beta * v) * prop.angular_kernel(env.beam, v / T, m, self.inner_spec)

        value, _ = integrate_semi_infinite(integrand, 1.0, self.inner_spec)
        return beta * value

    def conditional_coverage(
        self, env: PropagationEnvironment, beta: float, T: float, m: int = 1, method: str = "auto"
    ) -> float:
        """P(covered in m given slots | xi_0 = beta)."""
        if beta <= 0.0:
            return 1.0
        exponent = m * env.noise_mw * T * env.mu * beta
        exponent += env.density / (TWO_PI * env.reuse_k) * self.d_of(env, beta, T, m, method)
        return math.exp(-exponent)

    def coverage_given_xi0(self, env: PropagationEnvironment, beta: float, T: float, method: str = "auto") -> float:
        return self.conditional_coverage(env, beta, T, 1, method)

    # ------------------------------------------------------------------
    # q_m, outage, handover
    # ------------------------------------------------------------------

    def q_m(self, query: CoverageQuery, m: int, method: str = "auto") -> AnalyticResult:
        """Probability of coverage in m distinct slots of the same snapshot."""
        if m < 1:
            raise ValueError(f"m must be positive, got {m}")
        env, T = query.env, query.T

        if method != "quadrature":
            if not env.is_exponent:
                if method != "auto":
                    raise UnsupportedModelError(f"method '{method}' needs the exponent path loss model")
                return self._q_by_quadrature(env, T, m)
            big_m = self.m_m_constant(env.reuse_k, T, env.gamma, env.beam, m)
            g = m * self.noise_coefficient(env, T)
            if g == 0.0:
                return AnalyticResult(value=1.0 / big_m, method="closed")
            if method == "closed":
                return AnalyticResult(value=self._closed_gamma4(big_m, g, env.gamma), method="closed")
            return self._q_reduced(big_m, g, env.gamma)

        return self._q_by_quadrature(env, T, m)

    def coverage_probability(self, query: CoverageQuery, method: str = "auto") -> AnalyticResult:
        return self.q_m(query, 1, method)

    def outage_probability(self, query: CoverageQuery, method: str = "auto") -> AnalyticResult:
        q1 = self.q_m(query, 1, method)
        return AnalyticResult(value=_clip(1.0 - q1.value), error=q1.error, method=q1.method)

    def handover_probability(self, query: CoverageQuery, method: str = "auto") -> AnalyticResult:
        """Probability of outage in all of n consecutive slots."""
        n = query.n
        if n > settings.max_handover_slots:
            raise ValueError(f"n={n} exceeds the inclusion-exclusion cap {settings.max_handover_slots}")
        q = [self.q_m(query, m, method) for m in range(1, n + 1)]
        terms = [1.0] + [(-1) ** m * binomial(n, m) * q[m - 1].value for m in range(1, n + 1)]
        value = compensated_sum(terms)
        if not -CANCELLATION_SLACK <= value <= 1.0 + CANCELLATION_SLACK:
            raise CancellationError(f"inclusion-exclusion over {n} slots gave {value!r}")
        error = compensated_sum(binomial(n, m) * q[m - 1].error for m in range(1, n + 1))
        return AnalyticResult(value=_clip(value), error=error, method=q[-1].method)

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    def _q_reduced(self, big_m: float, g: float, gamma: float) -> AnalyticResult:
        half_gamma = 0.5 * gamma

        def integrand(alpha: float) -> float:
            return math.exp(-big_m * alpha - g * alpha ** half_gamma)

        value, error = integrate_semi_infinite(integrand, 0.0, self.spec)
        return AnalyticResult(value=value, error=error, method="reduced")

    @staticmethod
    def _closed_gamma4(big_m: float, g: float, gamma: float) -> float:
        """int_0^inf e^{-M a - G a^2} da = sqrt(pi/G) e^{M^2/4G} Q(M / sqrt(2G))."""
        if gamma != 4.0:
            raise UnsupportedModelError(f"closed form with noise exists for gamma = 4 only, got {gamma}")
        return math.sqrt(math.pi / g) * float(scaled_q_function(big_m / math.sqrt(2.0 * g)))

    @staticmethod
    def _require_continuous(env: PropagationEnvironment) -> None:
        if not env.is_exponent and prop.is_degenerate(env.shadowing):
            raise UnsupportedModelError(
                "modified path loss without shadowing puts an atom in the path-loss process; "
                "use lognormal shadowing or simulate"
            )

    def _q_by_quadrature(self, env: PropagationEnvironment, T: float, m: int) -> AnalyticResult:
        self._require_continuous(env)

        def cond(beta: float) -> float:
            return self.conditional_coverage(env, beta, T, m, method="quadrature")

        if env.is_exponent:
            # alpha = lambda_B B(beta) = lambda_B C beta^(2/gamma) turns the
            # xi_0 density into e^{-alpha}
            scale = env.density * prop.exponent_coefficient(env)
            half_gamma = 0.5 * env.gamma

            def integrand(alpha: float) -> float:
                if alpha <= 0.0:
                    return 1.0
                return math.exp(-alpha) * cond((alpha / scale) ** half_gamma)

            run = lambda: integrate_semi_infinite(integrand, 0.0, self.spec)  # noqa: E731
        else:
            beta_star = prop.characteristic_scale(env)

            def integrand(s: float) -> float:
                beta = beta_star * math.exp(s)
                mean = env.density * prop.B_of(env, beta)
                if mean > 700.0:
                    return 0.0
                return env.density * prop.B_prime_of(env, beta) * beta * math.exp(-mean) * cond(beta)

            run = lambda: integrate_real_line(integrand, self.spec)  # noqa: E731

        try:
            value, error = run()
        except QuadratureError as exc:
            exc.diagnostics.update(self._beta_diagnostics(env, cond))
            logger.error(f"coverage integral failed for T={T}, m={m}: {exc}")
            raise
        return AnalyticResult(value=value, error=error, method="quadrature")

    @staticmethod
    def _beta_diagnostics(env: PropagationEnvironment, cond: Callable[[float], float]) -> dict:
        beta_star = prop.characteristic_scale(env)
        grid: List[float] = [beta_star * 10.0 ** j for j in range(-3, 4)]
        samples = []
        for beta in grid:
            try:
                mean = env.density * prop.B_of(env, beta)
                samples.append(env.density * prop.B_prime_of(env, beta) * math.exp(-mean) * cond(beta))
            except Exception:  # diagnostics only
                samples.append(float("nan"))
        return {"beta_grid": grid, "beta_integrand": samples}


def _clip(p: float) -> float:
    return min(1.0, max(0.0, p))


# Global instance
analytic_service = AnalyticService()
