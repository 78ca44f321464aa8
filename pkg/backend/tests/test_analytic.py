"""
Tests for the analytic outage and handover probabilities.
"""

import math

import pytest

from app.core.errors import UnsupportedModelError
from app.core.numerics import QuadratureSpec, integrate_semi_infinite
from app.models.environment import (
    ConventionalBeam,
    ExponentPathLoss,
    LognormalShadowing,
    ModifiedExponentPathLoss,
)
from app.models.schemas import CoverageQuery
from app.services import propagation_service as prop
from app.services.analytic_service import AnalyticService, analytic_service
from tests.conftest import K_LINEAR, make_env, omni_m_closed_form


def query(env, T_db=10.0, n=1):
    return CoverageQuery(env=env, T=10.0 ** (T_db / 10.0), n=n)


class TestInterferenceLimited:
    @pytest.mark.parametrize("T", [0.1, 1.0, 10.0, 100.0])
    def test_m_matches_gamma4_closed_form(self, T):
        assert analytic_service.m_m_constant(1, T, 4.0, make_env().beam) == pytest.approx(
            omni_m_closed_form(T), rel=1e-9
        )

    @pytest.mark.parametrize("T", [0.1, 1.0, 10.0, 100.0])
    def test_full_quadrature_matches_closed_form(self, env, T):
        expected = 1.0 - 1.0 / omni_m_closed_form(T)
        result = analytic_service.outage_probability(CoverageQuery(env=env, T=T), method="quadrature")
        assert result.method == "quadrature"
        assert result.value == pytest.approx(expected, abs=1e-6)

    def test_reference_value(self, env):
        result = analytic_service.outage_probability(CoverageQuery(env=env, T=10.0))
        assert result.value == pytest.approx(0.7999, abs=1e-4)
        assert result.method == "closed"

    def test_coverage_complements_outage(self, env):
        q = query(env)
        assert analytic_service.coverage_probability(q).value == pytest.approx(
            1.0 - analytic_service.outage_probability(q).value
        )

    def test_handover_single_slot_is_outage(self, env):
        q = query(env, n=1)
        assert analytic_service.handover_probability(q).value == pytest.approx(
            analytic_service.outage_probability(q).value, rel=1e-10
        )

    def test_handover_three_slots(self, env):
        T = 10.0
        M = [analytic_service.m_m_constant(1, T, 4.0, env.beam, m) for m in (1, 2, 3)]
        expected = 1 - 3 / M[0] + 3 / M[1] - 1 / M[2]
        result = analytic_service.handover_probability(CoverageQuery(env=env, T=T, n=3))
        assert result.value == pytest.approx(expected, rel=1e-10)
        assert 0.0 < result.value < analytic_service.outage_probability(CoverageQuery(env=env, T=T)).value

    def test_q_m_strictly_decreasing(self, env):
        values = [analytic_service.q_m(query(env), m).value for m in range(1, 6)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_handover_slot_cap(self, env):
        with pytest.raises(ValueError):
            analytic_service.handover_probability(query(env, n=21))


class TestInvariance:
    def test_density_and_fading_rate(self, env):
        base = analytic_service.outage_probability(query(env)).value
        for changed in (make_env(density=env.density * 10), make_env(mu=10.0)):
            assert analytic_service.outage_probability(query(changed)).value == pytest.approx(base, abs=1e-9)

    def test_shadowing_with_equal_fractional_moment(self, env):
        lognormal = make_env(shadowing=LognormalShadowing(sigma_db=8.0))
        moment = prop.fractional_moment(lognormal.shadowing, 0.5)
        # K E(H^(1/2))^2 gives the same C without shadowing
        rescaled = make_env(pathloss=ExponentPathLoss(K=K_LINEAR * moment ** 2, gamma=4.0))
        assert prop.exponent_coefficient(rescaled) == pytest.approx(prop.exponent_coefficient(lognormal))
        a = analytic_service.outage_probability(query(lognormal, 0.0)).value
        b = analytic_service.outage_probability(query(rescaled, 0.0)).value
        assert a == pytest.approx(b, abs=1e-9)

    def test_noise_enters_through_mu_n_only(self):
        a = make_env(noise_mw=1e-13, mu=1.0)
        b = make_env(noise_mw=1e-14, mu=10.0)
        pa = analytic_service.outage_probability(query(a, 0.0)).value
        pb = analytic_service.outage_probability(query(b, 0.0)).value
        assert pa == pytest.approx(pb, rel=1e-10)


class TestNoise:
    def test_gaussian_integral(self):
        assert AnalyticService._closed_gamma4(1.0, 1.0, 4.0) == pytest.approx(0.5456, abs=1e-4)

    @pytest.mark.parametrize("noise_mw", [1e-14, 1e-13, 1e-12])
    @pytest.mark.parametrize("m", [1, 3])
    def test_closed_form_matches_reduced_quadrature(self, noise_mw, m):
        q = query(make_env(noise_mw=noise_mw), 0.0)
        closed = analytic_service.q_m(q, m, method="closed").value
        reduced = analytic_service.q_m(q, m, method="reduced").value
        assert closed == pytest.approx(reduced, rel=1e-8)

    def test_reduced_matches_full_quadrature(self):
        q = query(make_env(noise_mw=1e-13, gamma=3.5), 0.0)
        reduced = analytic_service.outage_probability(q, method="reduced").value
        full = analytic_service.outage_probability(q, method="quadrature").value
        assert full == pytest.approx(reduced, abs=1e-6)

    def test_closed_form_needs_gamma4(self):
        with pytest.raises(UnsupportedModelError):
            analytic_service.q_m(query(make_env(noise_mw=1e-13, gamma=3.0)), 1, method="closed")

    def test_noise_coefficient(self):
        env = make_env(noise_mw=1e-13)
        c = prop.exponent_coefficient(env)
        assert analytic_service.noise_coefficient(env, 2.0) == pytest.approx(1e-13 * 2.0 * (env.density * c) ** -2)

    def test_constants(self):
        q = query(make_env(noise_mw=1e-13), 10.0, n=3)
        constants = analytic_service.analytic_constants(q)
        assert len(constants.M) == 3
        assert constants.C == pytest.approx(math.pi * math.sqrt(K_LINEAR))
        assert constants.G > 0.0


class TestConstants:
    @pytest.mark.parametrize("m", [1, 3])
    @pytest.mark.parametrize("beam", [ConventionalBeam(n_t=1), ConventionalBeam(n_t=8)])
    def test_m_excess_inverse_in_reuse(self, m, beam):
        one = analytic_service.m_m_constant(1, 10.0, 4.0, beam, m)
        seven = analytic_service.m_m_constant(7, 10.0, 4.0, beam, m)
        assert (seven - 1.0) / (one - 1.0) == pytest.approx(1.0 / 7.0, rel=1e-12)

    def test_m3_regression_and_bounds(self, env):
        m1 = analytic_service.m_m_constant(1, 10.0, 4.0, env.beam, 1)
        m3 = analytic_service.m_m_constant(1, 10.0, 4.0, env.beam, 3)
        assert m1 == pytest.approx(4.99876007, rel=1e-8)
        assert m3 == pytest.approx(9.31379083, rel=1e-7)
        assert m1 < m3 <= 3.0 * (m1 - 1.0) + 1.0

    @pytest.mark.parametrize("fixture", ["env", "lognormal_env"])
    def test_d_scales_with_beta(self, request, fixture):
        env = request.getfixturevalue(fixture)
        beta = prop.characteristic_scale(env)
        ratio = analytic_service.d_of(env, 2.0 * beta, 10.0) / analytic_service.d_of(env, beta, 10.0)
        assert ratio == pytest.approx(2.0 ** (2.0 / env.gamma), rel=1e-12)
        generic = analytic_service.d_of(env, 2.0 * beta, 10.0, method="quadrature") / analytic_service.d_of(
            env, beta, 10.0, method="quadrature"
        )
        assert generic == pytest.approx(2.0 ** (2.0 / env.gamma), rel=1e-6)

    @pytest.mark.parametrize("T", [0.1, 1.0, 10.0])
    @pytest.mark.parametrize("gamma", [3.0, 4.0])
    @pytest.mark.parametrize("k", [1, 3, 7])
    def test_quadrature_reduced_and_closed_agree(self, T, gamma, k):
        env = make_env(gamma=gamma, reuse_k=k)
        M = analytic_service.m_m_constant(k, T, gamma, env.beam)
        closed = 1.0 - 1.0 / M
        reduced = 1.0 - analytic_service._q_reduced(M, 0.0, gamma).value
        quadrature = analytic_service.outage_probability(CoverageQuery(env=env, T=T), method="quadrature").value
        auto = analytic_service.outage_probability(CoverageQuery(env=env, T=T))
        assert auto.method == "closed"
        assert auto.value == pytest.approx(closed, abs=1e-12)
        assert reduced == pytest.approx(closed, abs=1e-6)
        assert quadrature == pytest.approx(closed, abs=1e-6)

    def test_tightened_tolerances_stay_within_reported_error(self, lognormal_env):
        spec = QuadratureSpec()
        loose = AnalyticService(spec=spec)
        tight = AnalyticService(spec=spec.tightened(10.0), inner_spec=loose.inner_spec.tightened(10.0))
        env = make_env(shadowing=lognormal_env.shadowing, noise_mw=1e-13, gamma=3.0)
        first = loose.outage_probability(CoverageQuery(env=env, T=1.0))
        second = tight.outage_probability(CoverageQuery(env=env, T=1.0))
        # slack covers the M constant, which the reported error leaves out
        assert abs(second.value - first.value) <= first.error + 1e-9


class TestMonotonicity:
    def test_nondecreasing_in_threshold(self, env):
        values = [analytic_service.outage_probability(query(env, t)).value for t in range(-10, 21, 2)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_nondecreasing_in_noise(self):
        values = [
            analytic_service.outage_probability(query(make_env(noise_mw=n), 0.0)).value
            for n in (0.0, 1e-14, 1e-13, 1e-12)
        ]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_nonincreasing_in_reuse(self):
        values = [analytic_service.outage_probability(query(make_env(reuse_k=k))).value for k in (1, 3, 7)]
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_decreasing_in_gamma(self):
        values = [
            analytic_service.outage_probability(query(make_env(gamma=g), 0.0)).value
            for g in (2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
        ]
        assert all(b < a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("T_db", [-10.0, 0.0, 10.0])
    @pytest.mark.parametrize("k", [1, 3, 7])
    def test_beamforming_helps(self, T_db, k):
        omni = analytic_service.outage_probability(query(make_env(reuse_k=k), T_db)).value
        beam = analytic_service.outage_probability(
            query(make_env(reuse_k=k, beam=ConventionalBeam(n_t=8)), T_db)
        ).value
        assert beam <= omni

    def test_shadowing_moment_without_noise_leaves_outage_unchanged(self):
        values = [
            analytic_service.outage_probability(
                query(make_env(shadowing=LognormalShadowing(sigma_db=s)), 0.0)
            ).value
            for s in (0.0, 4.0, 8.0, 12.0)
        ]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
        assert max(values) - min(values) < 1e-9

    def test_shadowing_moment_with_noise_lowers_outage(self):
        # G = N T mu (lambda C)^-2 shrinks as E(H^(1/2)) grows
        envs = [make_env(noise_mw=1e-13, shadowing=LognormalShadowing(sigma_db=s)) for s in (0.0, 4.0, 8.0, 12.0)]
        moments = [prop.fractional_moment(e.shadowing, 0.5) for e in envs]
        values = [analytic_service.outage_probability(query(e, 0.0)).value for e in envs]
        assert moments == sorted(moments)
        assert all(b < a for a, b in zip(values, values[1:]))


class TestGeneralModels:
    def test_conditional_coverage_exponent_paths_agree(self, lognormal_env):
        beta = prop.characteristic_scale(lognormal_env)
        fast = analytic_service.conditional_coverage(lognormal_env, beta, 10.0)
        slow = analytic_service.conditional_coverage(lognormal_env, beta, 10.0, method="quadrature")
        assert slow == pytest.approx(fast, rel=1e-7)

    def test_coverage_given_xi0_is_decreasing(self, env):
        beta = prop.characteristic_scale(env)
        values = [analytic_service.coverage_given_xi0(env, beta * f, 1.0) for f in (0.1, 1.0, 10.0)]
        assert values[0] > values[1] > values[2]

    def test_d_requires_positive_beta(self, env):
        with pytest.raises(ValueError):
            analytic_service.d_of(env, 0.0, 1.0)

    def test_modified_without_shadowing_rejected(self):
        env = make_env(pathloss=ModifiedExponentPathLoss(K=K_LINEAR, gamma=4.0, R0=50.0))
        with pytest.raises(UnsupportedModelError):
            analytic_service.outage_probability(query(env))

    def test_reduced_method_needs_exponent_model(self, modified_env):
        with pytest.raises(UnsupportedModelError):
            analytic_service.outage_probability(query(modified_env), method="reduced")

    def test_d_matches_exponent_form_through_generic_integral(self, lognormal_env):
        beta = prop.characteristic_scale(lognormal_env)
        fast = analytic_service.d_of(lognormal_env, beta, 3.0, m=2)
        generic = analytic_service.d_of(lognormal_env, beta, 3.0, m=2, method="quadrature")
        assert generic == pytest.approx(fast, rel=1e-7)

    @pytest.mark.slow
    def test_small_r0_approaches_exponent_model(self, lognormal_env):
        modified = make_env(
            pathloss=ModifiedExponentPathLoss(K=K_LINEAR, gamma=4.0, R0=1e-2),
            shadowing=LognormalShadowing(sigma_db=8.0),
        )
        expected = analytic_service.outage_probability(query(lognormal_env, 0.0)).value
        value = analytic_service.outage_probability(query(modified, 0.0)).value
        assert value == pytest.approx(expected, abs=1e-4)

    @pytest.mark.slow
    def test_modified_outage_is_a_probability(self, modified_env):
        result = analytic_service.outage_probability(query(modified_env, 0.0))
        assert 0.0 < result.value < 1.0
        assert result.method == "quadrature"
        assert result.error < 1e-6


def test_m_rejects_small_gamma(env):
    with pytest.raises(ValueError):
        analytic_service.m_m_constant(1, 1.0, 2.0, env.beam)


def test_reduced_integral_helper_is_exponential_without_noise():
    value, _ = integrate_semi_infinite(lambda a: math.exp(-2.0 * a))
    assert AnalyticService()._q_reduced(2.0, 1e-300, 4.0).value == pytest.approx(value, rel=1e-9)
