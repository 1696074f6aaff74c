import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpptest.errors import ConvergenceError, DomainError
from gpptest.special import (
    QuadratureSettings,
    integrate,
    psi,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)


def bisect_quantile(p, lo=-40.0, hi=40.0):
    """Independent oracle: invert the normal cdf by plain bisection
    (upper half by symmetry, where erfc keeps full relative accuracy)."""
    if p > 0.5:
        return -bisect_quantile(1.0 - p, lo, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.erfc(-mid / math.sqrt(2.0)) / 2.0 < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def simpson(f, a, b, h):
    """Composite Simpson rule with fixed step, as a coarse oracle."""
    k = int(round((b - a) / h))
    x = np.linspace(a, b, k + 1)
    w = np.ones(k + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return h / 3.0 * float(np.sum(w * f(x)))


class TestNormalDensity:
    def test_at_zero(self):
        assert std_normal_pdf(0.0) == pytest.approx(0.3989422804014327, abs=1e-16)

    def test_at_one(self):
        assert std_normal_pdf(1.0) == pytest.approx(0.24197072451914337, abs=1e-16)

    def test_symmetric(self):
        assert std_normal_pdf(-1.0) == std_normal_pdf(1.0)

    def test_vectorized(self):
        x = np.array([-2.0, 0.0, 3.0])
        np.testing.assert_allclose(std_normal_pdf(x), np.exp(-x**2 / 2) / math.sqrt(2 * math.pi))


class TestNormalCdf:
    def test_center(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_upper_tail(self):
        assert abs(std_normal_cdf(10.0) - 1.0) < 1e-12

    def test_inverse_of_quantile_oracle(self):
        assert std_normal_cdf(1.6448536269514722) == pytest.approx(0.95, abs=1e-10)

    def test_monotone_on_dense_grid(self):
        values = std_normal_cdf(np.linspace(-8, 8, 10_000))
        assert np.all(np.diff(values) >= 0)


class TestNormalQuantile:
    def test_median(self):
        assert std_normal_quantile(0.5) == 0.0

    @pytest.mark.parametrize("p", [0.95, 0.975])
    def test_against_bisection(self, p):
        assert std_normal_quantile(p) == pytest.approx(bisect_quantile(p), abs=1e-6)

    def test_known_values(self):
        assert std_normal_quantile(0.95) == pytest.approx(1.6448536, abs=1e-6)
        assert std_normal_quantile(0.975) == pytest.approx(1.9599640, abs=1e-6)

    @pytest.mark.parametrize("p", [1e-300, 1e-12, 0.001, 0.02425, 0.3, 0.97575, 1 - 1e-12])
    def test_full_accuracy_across_regions(self, p):
        assert std_normal_quantile(p) == pytest.approx(bisect_quantile(p), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, math.nan])
    def test_rejects_outside_open_interval(self, p):
        with pytest.raises(DomainError):
            std_normal_quantile(p)

    def test_round_trip_on_grid(self):
        x = np.linspace(-5, 5, 2001)
        assert np.max(np.abs(std_normal_quantile(std_normal_cdf(x)) - x)) <= 1e-7

    @given(st.floats(min_value=1e-10, max_value=1 - 1e-10))
    def test_antisymmetry(self, p):
        assert std_normal_quantile(p) == pytest.approx(-std_normal_quantile(1.0 - p), abs=1e-7)

    def test_array_and_scalar_agree(self):
        p = np.array([0.01, 0.5, 0.99])
        np.testing.assert_array_equal(std_normal_quantile(p), [std_normal_quantile(float(q)) for q in p])


class TestIntegrate:
    def test_constant(self):
        assert integrate(lambda x: np.ones_like(x), 0.0, 1.0) == pytest.approx(1.0, abs=1e-14)

    def test_odd_function(self):
        assert integrate(lambda x: x, -1.0, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_normal_density_normalized(self):
        assert integrate(std_normal_pdf, -10.0, 10.0) == pytest.approx(1.0, abs=1e-10)

    def test_requires_ordered_limits(self):
        with pytest.raises(DomainError):
            integrate(lambda x: x**2, 1.0, 0.0)

    def test_nonconvergence_raises_with_estimate(self):
        tight = QuadratureSettings(abs_tol=1e-15, max_depth=3)
        with pytest.raises(ConvergenceError) as info:
            integrate(lambda x: np.sqrt(np.abs(x)), -1.0, 1.0, tight)
        assert info.value.estimate == pytest.approx(4.0 / 3.0, abs=0.05)

    def test_settings_validated(self):
        with pytest.raises(DomainError):
            QuadratureSettings(abs_tol=0.0)

    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(st.floats(-3, 3), min_size=1, max_size=5),
        st.lists(st.floats(-3, 3), min_size=1, max_size=5),
        st.floats(-2, 2),
        st.floats(-2, 2),
    )
    def test_linear(self, cf, cg, a, b):
        f = np.polynomial.Polynomial(cf)
        g = np.polynomial.Polynomial(cg)
        s = QuadratureSettings(abs_tol=1e-10)
        lhs = integrate(lambda x: a * f(x) + b * g(x), -1.0, 2.0, s)
        rhs = a * integrate(f, -1.0, 2.0, s) + b * integrate(g, -1.0, 2.0, s)
        assert abs(lhs - rhs) <= 2 * s.abs_tol


class TestPsi:
    def test_zero(self):
        assert psi(0.0) == 0.0

    def test_one_matches_stein_identity(self):
        # E[X Phi(X)] = E[phi(X)] = 1 / (2 sqrt(pi))
        assert psi(1.0) == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)), abs=1e-9)

    def test_half_against_coarse_simpson(self):
        oracle = simpson(lambda x: x * std_normal_cdf(x) ** 0.5 * std_normal_pdf(x), -4.0, 4.0, 0.5)
        assert oracle == pytest.approx(0.2292, abs=5e-3)
        assert psi(0.5) == pytest.approx(oracle, abs=5e-3)

    def test_half_against_fine_simpson(self):
        oracle = simpson(lambda x: x * std_normal_cdf(x) ** 0.5 * std_normal_pdf(x), -10.0, 10.0, 1e-3)
        assert psi(0.5) == pytest.approx(oracle, abs=1e-9)

    def test_positive_on_grid(self):
        assert all(psi(d) > 0 for d in np.linspace(0.04, 2.0, 50))

    def test_negative_delta_rejected(self):
        with pytest.raises(DomainError):
            psi(-0.1)
