import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from dppstats import specfun as sf


# Values computed with mpmath at 30 digits / sympy exact arithmetic.
H2SQ_AT_1_3 = 0.0407942933369805413
LAG_2_5_AT_3 = 0.0896421457000795230
P_100_100 = 0.513298798279148665
I0_SCALED_8 = 0.143431781856850311


class TestHermite:
    def test_degree_zero_at_origin(self):
        assert sf.hermite_sq(0, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)

    def test_degree_one_vanishes_at_origin(self):
        assert sf.hermite_sq(1, 0.0) == 0.0

    def test_degree_two_against_brute_force(self):
        assert sf.hermite_sq(2, 1.3) == pytest.approx(H2SQ_AT_1_3, rel=1e-13)

    @pytest.mark.parametrize("alpha", [0, 1, 2, 5, 10, 20])
    def test_normalization(self, alpha):
        res = sf.quad(lambda x: float(sf.hermite_sq(alpha, x)), -math.inf, math.inf, tol=1e-12)
        assert res.value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("alpha", [0, 1, 3, 7])
    def test_tail_matches_quadrature(self, alpha):
        for x in (-2.5, -0.3, 0.0, 1.1, 3.0):
            ref = sf.quad(lambda u: float(sf.hermite_sq(alpha, u)), x, math.inf, tol=1e-13).value
            assert sf.hermite_tail(alpha, x) == pytest.approx(ref, abs=1e-11)

    @pytest.mark.parametrize("alpha", [0, 1, 2, 4])
    @pytest.mark.parametrize("deriv", [1, 2, 3])
    def test_derivatives_by_finite_differences(self, alpha, deriv):
        h = 1e-4
        xs = np.linspace(-3, 3, 13)
        num = (sf.hermite_sq(alpha, xs + h, deriv - 1) - sf.hermite_sq(alpha, xs - h, deriv - 1)) / (2 * h)
        assert np.allclose(sf.hermite_sq(alpha, xs, deriv), num, atol=1e-6)

    def test_rejects_large_degree(self):
        with pytest.raises(ValueError):
            sf.hermite_sq(61, 0.0)

    @given(st.integers(0, 30), st.floats(-30, 30))
    def test_nonnegative(self, alpha, x):
        assert sf.hermite_sq(alpha, x) >= 0.0

    @given(st.integers(0, 12), st.floats(-8, 8))
    def test_tail_plus_cdf_is_one(self, alpha, x):
        assert sf.hermite_tail(alpha, x) + sf.hermite_cdf(alpha, x) == pytest.approx(1.0, abs=1e-12)


class TestLaguerre:
    @pytest.mark.parametrize("beta", [0.0, 1.0, 2.5, 7.0])
    def test_degree_zero(self, beta):
        assert sf.laguerre_eval(0, beta, 1.7) == pytest.approx(special.gamma(beta + 1) ** -0.5, rel=1e-14)

    def test_degree_one_beta_zero(self):
        assert sf.laguerre_eval(1, 0.0, 0.0) == pytest.approx(1.0)
        assert sf.laguerre_eval(1, 0.0, 2.5) == pytest.approx(-1.5)

    def test_symbolic_value(self):
        assert sf.laguerre_eval(2, 5, 3.0) == pytest.approx(LAG_2_5_AT_3, rel=1e-13)

    @pytest.mark.parametrize("alpha", [0, 1, 3, 6, 10])
    @pytest.mark.parametrize("beta", [0.0, 1.0, 2.5])
    def test_orthonormality(self, alpha, beta):
        f = lambda x: float(sf.laguerre_eval(alpha, beta, x) ** 2 * x**beta * math.exp(-x))
        assert sf.quad(f, 0, math.inf, tol=1e-12).value == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("beta", [-1, -2])
    def test_negative_integer_beta_down_to_minus_alpha(self, beta):
        # for integer beta >= -alpha the polynomial vanishes to order -beta at 0
        f = lambda x: float(sf.laguerre_eval(2, beta, x) ** 2 * x**beta * math.exp(-x))
        assert sf.quad(f, 0, math.inf, tol=1e-12).value == pytest.approx(1.0, abs=1e-9)

    def test_rejects_non_normalizable(self):
        with pytest.raises(ValueError):
            sf.laguerre_eval(1, -3.0, 1.0)


class TestIncompleteFunctions:
    def test_gamma_small_cases(self):
        assert sf.reg_inc_gamma(1, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
        assert sf.reg_inc_gamma(2, 1.0) == pytest.approx(1 - 2 * math.exp(-1), rel=1e-14)

    def test_gamma_poisson_oracle(self):
        assert sf.reg_inc_gamma(100, 100.0) == pytest.approx(P_100_100, rel=1e-13)

    @pytest.mark.parametrize("k", [1, 3, 17, 50])
    def test_gamma_poisson_sum(self, k):
        for R in (0.5, 7.0, 40.0, 100.0):
            ref = 1 - sum(math.exp(-R + l * math.log(R) - math.lgamma(l + 1)) for l in range(k))
            assert sf.reg_inc_gamma(k, R) == pytest.approx(ref, abs=1e-13)

    def test_beta_uniform_and_endpoints(self):
        u = np.linspace(0, 1, 11)
        assert np.allclose(sf.reg_inc_beta(1, 1, u), u)
        assert sf.reg_inc_beta(3, 2, 0.0) == 0.0 and sf.reg_inc_beta(3, 2, 1.0) == 1.0

    def test_beta_against_quadrature(self):
        ref = sf.quad(lambda x: x**2 * (1 - x) / special.beta(3, 2), 0, 0.5, tol=1e-14).value
        assert sf.reg_inc_beta(3, 2, 0.5) == pytest.approx(ref, rel=1e-13)
        assert ref == pytest.approx(5 / 16, rel=1e-13)

    @pytest.mark.parametrize("k", [1, 4, 30])
    def test_monotone_on_grid(self, k):
        grid = np.linspace(0, 3 * k, 1000)
        assert np.all(np.diff(sf.reg_inc_gamma(k, grid)) >= 0)
        ugrid = np.linspace(0, 1, 1000)
        assert np.all(np.diff(sf.reg_inc_beta(k, 1.7, ugrid)) >= 0)

    def test_complements(self):
        assert sf.reg_inc_gamma_upper(5, 3.0) + sf.reg_inc_gamma(5, 3.0) == pytest.approx(1.0)
        assert sf.reg_inc_beta_upper(2, 3, 0.4) + sf.reg_inc_beta(2, 3, 0.4) == pytest.approx(1.0)


class TestBessel:
    def test_at_zero(self):
        assert sf.bessel_I_scaled(0, 0.0) == 1.0
        assert sf.bessel_I_scaled(1, 0.0) == 0.0

    def test_series_oracle(self):
        assert sf.bessel_I_scaled(0, 8.0) == pytest.approx(I0_SCALED_8, rel=1e-14)

    def test_large_argument(self):
        x = 1e3
        assert sf.bessel_I_scaled(0, x) * math.sqrt(2 * math.pi * x) == pytest.approx(1.0, rel=1e-2)

    def test_rejects_other_orders(self):
        with pytest.raises(ValueError):
            sf.bessel_I_scaled(2, 1.0)


class TestQuad:
    def test_exponential(self):
        assert sf.quad(lambda x: math.exp(-x), 0, math.inf, 1e-10).value == pytest.approx(1.0, abs=1e-10)

    def test_gaussian_density(self):
        res = sf.quad(lambda x: float(sf.hermite_sq(0, x)), -math.inf, math.inf, 1e-10)
        assert res.value == pytest.approx(1.0, abs=1e-10)
        assert res.abs_error_estimate >= 0 and res.subdivisions >= 1

    def test_variance_density(self):
        f = lambda x: float(sf.gauss_tail(x) * sf.gauss_tail(-x))
        assert sf.quad(f, -math.inf, math.inf, 1e-10).value == pytest.approx(1 / math.sqrt(math.pi), abs=1e-10)

    def test_reversed_limits(self):
        assert sf.quad(lambda x: 1.0, 1, 0).value == pytest.approx(-1.0)

    def test_failure_carries_estimate(self):
        with pytest.raises(sf.QuadratureError) as info:
            sf.quad(lambda x: math.sin(1 / x) / x, 1e-8, 1.0, tol=1e-14, limit=5)
        assert math.isfinite(info.value.best.value)

    @settings(max_examples=30)
    @given(st.floats(0.1, 5.0), st.floats(0.1, 5.0))
    def test_polynomial_exact(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert sf.quad(lambda x: x**3, lo, hi).value == pytest.approx((hi**4 - lo**4) / 4, rel=1e-12, abs=1e-14)
