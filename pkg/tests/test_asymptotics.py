import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from gpptest import asymptotics as asy
from gpptest.errors import DomainError, ParameterError
from gpptest.special import psi

PSI_1 = 1.0 / (2.0 * math.sqrt(math.pi))  # Stein identity


def oracle_power(drift, xi, alpha=0.05):
    return 1.0 - norm.cdf(norm.ppf(1.0 - alpha) - drift * xi)


class TestLocalAlternatives:
    def test_delta_direct(self):
        assert asy.theta_n_delta(1.0, 10_000, -0.1, 1.0) == pytest.approx(1 / math.sqrt(10), rel=1e-14)

    def test_delta_zero(self):
        assert asy.theta_n_delta(0.0, 10_000, -0.1, 1.0) == 0.0

    def test_delta_half(self):
        assert asy.theta_n_delta(2.0, 10**6, -0.01, 0.5) == pytest.approx(0.2, rel=1e-14)

    def test_expfam_direct(self):
        assert asy.theta_n_expfam(1.0, 10_000, -0.01, 1.0, 0.0, 0.5) == pytest.approx(-0.2, rel=1e-14)

    def test_expfam_zero(self):
        assert asy.theta_n_expfam(0.0, 10_000, -0.01, 1.0, 0.0, 0.5) == 0.0

    def test_expfam_scaling_in_a(self):
        a1 = asy.theta_n_expfam(1.0, 10_000, -0.01, 1.0, 0.0, 0.5)
        a4 = asy.theta_n_expfam(1.0, 10_000, -0.01, 4.0, 0.0, 0.5)
        assert a4 == pytest.approx(a1 / 2)

    def test_expfam_degenerate_family(self):
        with pytest.raises(ParameterError):
            asy.theta_n_expfam(1.0, 100, -0.1, 1.0, 0.5, 0.5)

    def test_domain(self):
        with pytest.raises(DomainError):
            asy.theta_n_delta(1.0, 0, -0.1, 1.0)
        with pytest.raises(DomainError):
            asy.theta_n_delta(1.0, 10, 0.1, 1.0)


class TestPower:
    def test_optimal_at_zero_is_alpha(self):
        assert asy.power_optimal_delta(0.0, 1.0, 1.0, 1.0, 0.05) == pytest.approx(0.05, abs=1e-15)

    def test_optimal_value(self):
        expected = oracle_power(1 / math.sqrt(3), 2.0)
        assert asy.power_optimal_delta(2.0, 1.0, 1.0, 1.0, 0.05) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.312, abs=5e-4)

    def test_omnibus_value(self):
        expected = oracle_power(PSI_1, 2.0)
        assert asy.power_omnibus_delta(2.0, 1.0, 1.0, 1.0, 0.05) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(0.140, abs=5e-4)

    def test_omnibus_at_zero(self):
        assert asy.power_omnibus_delta(0.0, 1.0, 1.0, 1.0, 0.05) == pytest.approx(0.05, abs=1e-15)

    def test_expfam(self):
        assert asy.power_optimal_expfam(0.0, 0.05) == pytest.approx(0.05, abs=1e-15)
        assert asy.power_optimal_expfam(norm.ppf(0.95), 0.05) == pytest.approx(0.5, abs=1e-12)
        assert asy.power_optimal_expfam(3.0, 0.05) == pytest.approx(oracle_power(1.0, 3.0), abs=1e-12)
        assert asy.power_optimal_expfam(3.0, 0.05) == pytest.approx(0.9123, abs=1e-4)

    def test_expfam_omnibus_is_blind(self):
        assert asy.power_omnibus_expfam(5.0, 0.05) == 0.05

    @given(st.floats(0, 10), st.floats(0, 10))
    def test_increasing_in_abs_xi(self, a, b):
        lo, hi = sorted((a, b))
        assert asy.power_optimal_delta(lo, 1, 1, 1, 0.05) <= asy.power_optimal_delta(hi, 1, 1, 1, 0.05)

    @given(st.floats(-10, 10))
    def test_even_in_xi(self, xi):
        assert asy.power_optimal_delta(xi, 0.8, 0.6, 0.5, 0.05) == asy.power_optimal_delta(-xi, 0.8, 0.6, 0.5, 0.05)

    def test_omnibus_below_optimal(self):
        for delta in np.linspace(0.01, 1.0, 40):
            for xi in (0.5, 1.0, 3.0):
                assert (asy.power_omnibus_delta(xi, 1, 1, delta, 0.05)
                        <= asy.power_optimal_delta(xi, 1, 1, delta, 0.05))

    def test_lower_side_mirrors_upper(self):
        assert asy.power_one_sided(0.5, -2.0, 0.05, "lower") == asy.power_one_sided(0.5, 2.0, 0.05, "upper")


class TestAre:
    def test_zero(self):
        assert asy.are_delta(0.0) == 0.0

    def test_one(self):
        assert asy.are_delta(1.0) == pytest.approx(3 / (4 * math.pi), abs=1e-6)

    def test_half(self):
        assert asy.are_delta(0.5) == pytest.approx(2 * 0.2292**2, abs=5e-3)

    def test_squared_drift_ratio(self):
        for delta in np.linspace(0.01, 1.0, 100):
            ratio = asy.drift_omnibus_delta(1, 1, delta) / asy.drift_optimal_delta(1, 1, delta)
            are = asy.are_delta(delta)
            assert 0 < are < 1
            assert are == pytest.approx(ratio**2, abs=1e-9)

    def test_increasing(self):
        values = [asy.are_delta(d) for d in np.linspace(0, 1, 21)]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestLan:
    def test_delta(self):
        lan = asy.lan_params_delta(1.0, 1.0, 1.0, 1.0)
        assert lan.sigma2 == pytest.approx(1 / 3)
        assert lan.mean_h0 == pytest.approx(-1 / 6)

    def test_delta_degenerate(self):
        assert asy.lan_params_delta(0.0, 1.0, 1.0, 1.0).degenerate

    @given(st.floats(-5, 5), st.floats(0.05, 1.0), st.floats(0.01, 1.0))
    def test_delta_equal_constants(self, xi, a, delta):
        assert asy.lan_params_delta(xi, a, a, delta).sigma2 == pytest.approx(xi**2 * a / (2 * delta + 1))

    def test_expfam(self):
        lan = asy.lan_params_expfam(1.0)
        assert lan.sigma2 == 1.0 and lan.mean_h0 == -0.5

    def test_expfam_degenerate_and_even(self):
        assert asy.lan_params_expfam(0.0).degenerate
        assert asy.lan_params_expfam(-2.0).sigma2 == 4.0

    @given(st.floats(-5, 5), st.floats(0.05, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
    def test_alternative_shift_reproduces_drift(self, xi, a, b, delta):
        b = min(a, b)
        shift = asy.alternative_mean_sum_delta(xi, a, b, delta) / math.sqrt(asy.alternative_var_sum_delta(delta))
        assert shift == pytest.approx(xi * asy.drift_optimal_delta(a, b, delta), rel=1e-12, abs=1e-300)


def test_psi_memoized():
    psi(0.37)
    assert psi(0.37) is psi(0.37)
