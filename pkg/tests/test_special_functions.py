import math

import numpy as np
import pytest

from linopt_bp import (
    LogScaled,
    bessel_i,
    log_gamma,
    small_arg_asymptotic_i,
    uniform_asymptotic_i,
)
from linopt_bp.special_functions import TERM_CUTOFF_LOG

from conftest import log_gamma_recursion, series_bessel_i


class TestBesselI:
    def test_zero_argument(self):
        assert bessel_i(0, 0.0).log_value == 0.0
        assert bessel_i(1, 0.0).log_value == -math.inf
        assert bessel_i(7, 0.0).value == 0.0

    def test_reference_values_from_series_oracle(self):
        # frozen from the 30-term power-series oracle
        assert bessel_i(0, 1.0).value == pytest.approx(1.2660658777520084, rel=1e-12)
        assert bessel_i(5, 2.0).value == pytest.approx(0.009825679323131702, rel=1e-12)

    def test_against_series_oracle_grid(self):
        for nu in range(0, 51, 5):
            for x in (0.25, 1.0, 3.0, 7.0, 10.0):
                oracle = series_bessel_i(nu, x)
                mine = bessel_i(nu, x)
                assert abs(math.expm1(mine.log_value - math.log(oracle))) <= 1e-10, (nu, x)

    def test_three_term_recurrence(self):
        for nu in (1, 2, 5, 17, 50, 100):
            for x in (0.1, 1.0, 10.0, 100.0, 400.0):
                logs = [bessel_i(nu + d, x).log_value for d in (-1, 0, 1)]
                ref = max(logs)
                lhs = math.exp(logs[0] - ref) - math.exp(logs[2] - ref)
                rhs = (2.0 * nu / x) * math.exp(logs[1] - ref)
                assert abs(lhs - rhs) <= 1e-8 * abs(rhs), (nu, x)

    def test_monotone_decreasing_in_order(self):
        for x in (0.5, 4.0, 50.0):
            logs = [bessel_i(nu, x).log_value for nu in range(0, 30)]
            assert all(a > b for a, b in zip(logs, logs[1:]))

    def test_extreme_ranges_stay_finite(self):
        # orders ~1e4 and arguments up to 4e6 (intensities up to 1e6)
        for nu, x in [(10_000, 4.0), (10_000, 4e6), (2, 4e6), (500, 1e3)]:
            val = bessel_i(nu, x).log_value
            assert math.isfinite(val), (nu, x)

    def test_window_policy_constant_pinned(self):
        assert TERM_CUTOFF_LOG == 46.0

    def test_invalid_inputs(self):
        with pytest.raises(ValueError, match="order"):
            bessel_i(-1, 1.0)
        with pytest.raises(ValueError, match="argument"):
            bessel_i(0, -0.5)
        with pytest.raises(ValueError, match="argument"):
            bessel_i(0, math.inf)


class TestUniformAsymptotic:
    def test_matches_exact_within_one_percent_at_nu_50(self):
        nu, z = 50, 1.0
        exact = bessel_i(nu, nu * z).log_value
        approx = uniform_asymptotic_i(nu, nu * z).log_value
        assert abs(math.expm1(approx - exact)) <= 0.01

    def test_relative_error_improves_with_order(self):
        z = 1.0
        errs = []
        for nu in (10, 25, 50, 100, 200):
            exact = bessel_i(nu, nu * z).log_value
            approx = uniform_asymptotic_i(nu, nu * z).log_value
            errs.append(abs(math.expm1(approx - exact)))
        assert all(a > b for a, b in zip(errs, errs[1:])), errs

    def test_order_below_one_rejected(self):
        with pytest.raises(ValueError, match="order"):
            uniform_asymptotic_i(0, 1.0)


class TestSmallArgAsymptotic:
    def test_zero_limit(self):
        assert small_arg_asymptotic_i(0, 0.0).log_value == 0.0
        assert small_arg_asymptotic_i(3, 0.0).log_value == -math.inf

    def test_leading_error_is_first_series_term(self):
        # the relative error of the leading term is x^2/(4(nu+1)) to first order
        for nu in (0, 1, 4, 12):
            x = math.sqrt(4e-4 * (nu + 1)) * 0.9
            ratio = x * x / (4.0 * (nu + 1))
            exact = bessel_i(nu, x).log_value
            approx = small_arg_asymptotic_i(nu, x).log_value
            assert abs(math.expm1(approx - exact)) <= 1.1 * ratio, nu

    def test_agrees_with_series_in_deep_small_regime(self):
        # agreement to 1e-6 in linear scale once x^2/(4(nu+1)) < 1e-6
        for nu in (0, 1, 4, 12):
            x = math.sqrt(4e-6 * (nu + 1)) * 0.9
            exact = bessel_i(nu, x).log_value
            approx = small_arg_asymptotic_i(nu, x).log_value
            assert abs(math.expm1(approx - exact)) <= 1e-6, nu


class TestLogGamma:
    def test_anchors(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)

    def test_against_recursion_oracle(self):
        for x in (2.0, 7.0, 10.5, 33.5, 171.0):
            assert log_gamma(x) == pytest.approx(log_gamma_recursion(x), rel=1e-12)

    def test_gamma_ten_and_a_half(self):
        # Gamma(10.5) via the recursion oracle from Gamma(0.5) = sqrt(pi)
        oracle = math.exp(log_gamma_recursion(10.5))
        assert math.exp(log_gamma(10.5)) == pytest.approx(oracle, rel=1e-12)
        assert oracle == pytest.approx(1.1332783889487e6, rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError, match="x > 0"):
            log_gamma(0.0)


class TestLogScaled:
    def test_from_value_roundtrip(self):
        assert LogScaled.from_value(2.5).value == pytest.approx(2.5, rel=1e-15)
        assert LogScaled.from_value(0.0).log_value == -math.inf

    def test_scaling(self):
        x = LogScaled.from_value(3.0)
        assert x.scaled(2.0).value == pytest.approx(6.0, rel=1e-14)
        assert x.scaled(0.0).log_value == -math.inf
        with pytest.raises(ValueError, match="nonnegative"):
            x.scaled(-1.0)

    def test_ordering(self):
        assert LogScaled(-1.0) < LogScaled(0.0)
