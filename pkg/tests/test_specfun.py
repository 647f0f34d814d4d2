"""Special-function layer: series engines, sign handling, reliability flags."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fracount import specfun as sf
from fracount.errors import ConvergenceDomainError, DomainError

from conftest import assert_close

# frozen via tests/oracles.py (mpmath, dps=40)
ML_HALF_MINUS_ONE = 0.42758357615580700
EULER_GAMMA = 0.57721566490153286
INC_BETA_EXAMPLE = 1.0378973098592883
ML_03_M2 = 0.29023222616527798
MW_05_ORACLE = 0.32146553459760369


class TestLogGammaSigned:
    def test_gamma_one(self):
        assert sf.log_gamma_signed(1.0) == (0.0, 1)

    def test_gamma_five(self):
        lg, sgn = sf.log_gamma_signed(5.0)
        assert sgn == 1
        assert_close(lg, math.log(24.0))

    def test_negative_half_via_reflection(self):
        lg, sgn = sf.log_gamma_signed(-0.5)
        assert sgn == -1
        assert_close(lg, math.log(2.0 * math.sqrt(math.pi)), rtol=1e-13)

    def test_pole_rejected(self):
        for x in (0.0, -1.0, -7.0):
            with pytest.raises(DomainError):
                sf.log_gamma_signed(x)

    @given(st.floats(-10, 10).filter(lambda x: abs(x - round(x)) > 1e-3 or x > 0.5))
    @settings(max_examples=200, deadline=None)
    def test_recurrence(self, x):
        if x <= 0 and abs(x - round(x)) <= 1e-3:
            return
        lg1, s1 = sf.log_gamma_signed(x + 1.0)
        lg0, s0 = sf.log_gamma_signed(x)
        lhs = s1 * math.exp(lg1)
        rhs = x * s0 * math.exp(lg0)
        assert_close(lhs, rhs, rtol=1e-12)


class TestDigamma:
    def test_euler_mascheroni(self):
        assert_close(sf.digamma(1.0), -EULER_GAMMA, rtol=1e-12)

    def test_recurrence(self):
        assert_close(sf.digamma(2.0), sf.digamma(1.0) + 1.0, rtol=1e-12)

    def test_duplication_at_half(self):
        assert_close(sf.digamma(0.5), sf.digamma(1.0) - 2.0 * math.log(2.0), rtol=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.digamma(0.0)


class TestMittagLeffler:
    def test_beta_one_is_exp(self):
        v = sf.mittag_leffler(1.0, -2.0)
        assert_close(v.value, math.exp(-2.0), rtol=1e-13)
        assert v.reliable

    def test_zero_argument(self):
        for b in (0.2, 0.5, 0.9):
            assert sf.mittag_leffler(b, 0.0).value == 1.0

    def test_half_at_minus_one(self):
        v = sf.mittag_leffler(0.5, -1.0)
        assert v.reliable
        assert_close(v.value, ML_HALF_MINUS_ONE, rtol=1e-12)

    def test_flags_unreliable_deep_negative_small_beta(self):
        v = sf.mittag_leffler(0.3, -5.0)
        assert not v.reliable

    def test_cm_integral_matches_series_oracle(self):
        assert_close(sf.ml_completely_monotone(0.3, 2.0), ML_03_M2, rtol=1e-8)
        assert_close(sf.ml_completely_monotone(0.5, 1.0), ML_HALF_MINUS_ONE, rtol=1e-9)

    def test_complete_monotonicity_on_grid(self):
        # values in (0, 1], decreasing in |z|, falling back to the integral
        # where the series flags itself unreliable
        for b in np.arange(0.1, 0.95, 0.1):
            prev = 1.0 + 1e-15
            for z in np.linspace(0.0, 5.0, 21):
                v = sf.mittag_leffler(float(b), -float(z))
                val = v.value if v.reliable else sf.ml_completely_monotone(float(b), float(z))
                assert 0.0 < val <= 1.0 + 1e-12
                assert val <= prev + 1e-9
                prev = val


class TestMWright:
    def test_at_zero(self):
        for b in (0.3, 0.5, 0.7):
            assert_close(sf.m_wright(b, 0.0).value, 1.0 / math.gamma(1.0 - b), rtol=1e-13)

    def test_half_closed_form(self):
        v = sf.m_wright(0.5, 1.0)
        assert v.reliable
        assert_close(v.value, math.exp(-0.25) / math.sqrt(math.pi), rtol=1e-12)

    def test_series_oracle_value(self):
        assert_close(sf.m_wright(0.5, 1.5).value, MW_05_ORACLE, rtol=1e-12)

    @pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
    def test_integrates_to_one(self, beta):
        val, _ = quad(lambda z: sf.m_wright_robust(beta, z).value, 0.0, np.inf, limit=200)
        assert_close(val, 1.0, atol=1e-6)

    def test_robust_matches_closed_form_large_argument(self):
        z = 40.0
        v = sf.m_wright_robust(0.5, z)
        assert v.method == "quadrature"
        assert_close(v.value, math.exp(-z * z / 4.0) / math.sqrt(math.pi), rtol=1e-5)


class TestGenWright:
    def test_exponential_case(self):
        p = sf.WrightParams(((1.0, 1.0),), ((1.0, 1.0),))
        v = sf.gen_wright(p, 1.3)
        assert_close(v.value, math.exp(1.3), rtol=1e-12)

    def test_fnbp_parameters_match_quadrature_oracle(self):
        # n = 0, beta = 1/2, shape 1, z = -lam/alpha^beta; the mixed pmf
        # then collapses to a geometric sum with value 2 - sqrt(2)
        p = sf.WrightParams(((1.0, 1.0), (1.0, 0.5)), ((1.0, 0.5),))
        v = sf.gen_wright(p, -1.0 / math.sqrt(2.0))
        assert_close(v.value, 2.0 - math.sqrt(2.0), atol=1e-8)

    def test_boundary_of_unit_radius_rejected(self):
        p = sf.WrightParams(((1.0, 1.0), (1.0, 0.5)), ((1.0, 0.5),))
        assert p.convergence_exponent() == pytest.approx(-1.0)
        assert p.radius() == pytest.approx(1.0)
        with pytest.raises(ConvergenceDomainError):
            sf.gen_wright(p, -1.0)

    def test_too_negative_exponent_rejected(self):
        p = sf.WrightParams(((1.0, 1.0), (1.0, 1.0), (1.0, 1.0)), ((1.0, 0.5),))
        with pytest.raises(ConvergenceDomainError):
            sf.gen_wright(p, 0.1)

    def test_agrees_with_h22_at_zero_shift(self):
        n, b, pt = 2, 0.6, 1.4
        z = 0.55
        p = sf.WrightParams(((n + 1.0, 1.0), (n * b + pt, b)), ((n * b + 1.0, b),))
        via_psi = sf.gen_wright(p, -z)
        via_h = sf.h22_series(n, b, pt, 0, z)
        tol = via_psi.est_error + via_h.est_error + 1e-13
        assert abs(via_psi.value - via_h.value) <= tol


class TestH22Series:
    def test_geometric_case(self):
        v = sf.h22_series(0, 1.0, 1.0, 0, 0.4)
        assert_close(v.value, 1.0 / 1.4, rtol=1e-12)

    def test_outside_unit_disk_rejected(self):
        with pytest.raises(ConvergenceDomainError):
            sf.h22_series(1, 0.5, 1.0, 0, 1.0)

    def test_shift_matches_derivative(self):
        # d/dz H_0(z) = -H_1(z)/z, checked by central differences
        n, b, pt = 1, 0.5, 1.0
        z, h = 0.35, 1e-5
        d_num = (sf.h22_series(n, b, pt, 0, z + h).value
                 - sf.h22_series(n, b, pt, 0, z - h).value) / (2.0 * h)
        rhs = -sf.h22_series(n, b, pt, 1, z).value / z
        assert_close(d_num, rhs, rtol=1e-8)


class TestIncompleteBeta:
    def test_at_zero(self):
        assert sf.incomplete_beta(0.5, 1.5, 0.0) == 0.0

    def test_complete(self):
        assert_close(
            sf.incomplete_beta(0.5, 1.5, 1.0),
            math.gamma(0.5) * math.gamma(1.5) / math.gamma(2.0),
            rtol=1e-12,
        )

    def test_quadrature_oracle(self):
        assert_close(sf.incomplete_beta(0.5, 1.5, 0.3), INC_BETA_EXAMPLE, rtol=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            sf.incomplete_beta(0.5, 1.5, 1.2)


class TestBinomGeneral:
    def test_ordinary_binomial(self):
        assert sf.binom_general(1.0, 0) == 1.0
        assert sf.binom_general(1.0, 1) == 1.0
        assert sf.binom_general(1.0, 2) == 0.0

    def test_half(self):
        assert_close(sf.binom_general(0.5, 1), 0.5, rtol=1e-15)

    def test_binomial_series(self):
        total_abs = sum(abs(sf.binom_general(0.7, r)) for r in range(201))
        assert math.isfinite(total_abs)
        s = sum(sf.binom_general(0.7, r) * (-1) ** r * 0.3**r for r in range(201))
        assert_close(s, 0.7**0.7, rtol=1e-12)

    @given(st.integers(0, 30), st.floats(-3, 5))
    @settings(max_examples=200, deadline=None)
    def test_pascal_recurrence(self, r, beta):
        lhs = sf.binom_general(beta + 1.0, r + 1)
        rhs = sf.binom_general(beta, r) + sf.binom_general(beta, r + 1)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


class TestSeriesControl:
    def test_invariants(self):
        with pytest.raises(DomainError):
            sf.SeriesControl(rel_tol=2.0)
        with pytest.raises(DomainError):
            sf.SeriesControl(max_terms=4)

    def test_high_precision_switch(self):
        v = sf.mittag_leffler(0.5, -1.0, sf.SeriesControl(high_precision=True))
        assert_close(v.value, ML_HALF_MINUS_ONE, rtol=1e-13)

    def test_reliable_needs_finite_error(self):
        with pytest.raises(DomainError):
            sf.SeriesValue(1.0, math.inf, 3, True)


class TestStableLaw:
    def test_pdf_matches_levy_half(self):
        for x in (0.3, 1.0, 3.0):
            levy = 0.5 / math.sqrt(math.pi) * x**-1.5 * math.exp(-0.25 / x)
            assert_close(sf.stable_pdf(x, 0.5), levy, rtol=1e-9)

    def test_cdf_matches_levy_half(self):
        from scipy.special import erfc

        for x in (0.5, 1.0, 2.5):
            assert_close(sf.stable_cdf(x, 0.5), erfc(math.sqrt(0.25 / x)), rtol=1e-9)

    def test_pdf_normalizes(self):
        val, _ = quad(lambda x: sf.stable_pdf(x, 0.7), 0.0, np.inf, limit=300)
        assert_close(val, 1.0, atol=1e-7)
