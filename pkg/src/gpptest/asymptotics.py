"""Closed-form asymptotics: local alternatives, power functions, LAN limits, ARE."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ParameterError
from .special import DEFAULT_QUADRATURE, psi, std_normal_cdf, std_normal_quantile


@dataclass(frozen=True)
class LanParams:
    """Limit ``N(mean_h0, sigma2)`` of the log-likelihood ratio under the null
    and ``N(mean_h1, sigma2)`` under the local alternatives."""

    sigma2: float

    @property
    def mean_h0(self):
        return -0.5 * self.sigma2

    @property
    def mean_h1(self):
        return 0.5 * self.sigma2

    @property
    def degenerate(self):
        return self.sigma2 == 0.0


def theta_n_delta(xi, n, c, delta):
    """``xi / sqrt(n |c|**(1 + 2 delta))``."""
    if n < 1 or not c < 0:
        raise DomainError("need n >= 1 and c < 0")
    return xi / math.sqrt(n * abs(c) ** (1.0 + 2.0 * delta))


def theta_n_expfam(xi, n, c, A, C_limit, intT):
    """``xi / (sqrt(n |c|) sqrt(A) (C - int T))``."""
    if n < 1 or not c < 0 or not A > 0:
        raise DomainError("need n >= 1, c < 0 and A > 0")
    gap = C_limit - intT
    if gap == 0:
        raise ParameterError("degenerate family: lim T(0+) equals the integral of T")
    return xi / (math.sqrt(n * abs(c)) * math.sqrt(A) * gap)


def _u_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return std_normal_quantile(1.0 - alpha)


def drift_optimal_delta(A, B, delta):
    """Limit mean of the normalized central statistic per unit xi."""
    if not (A > 0 and B > 0):
        raise DomainError("need A > 0 and B > 0")
    return B / (math.sqrt(A) * math.sqrt(2.0 * delta + 1.0))


def drift_omnibus_delta(A, B, delta, settings=DEFAULT_QUADRATURE):
    if not (A > 0 and B > 0):
        raise DomainError("need A > 0 and B > 0")
    return B / math.sqrt(A) * psi(delta, settings)


def power_one_sided(drift, xi, alpha, side="upper"):
    """Limit rejection rate of a one-sided test whose statistic is asymptotically
    ``N(drift * xi, 1)``."""
    shift = drift * xi if side == "upper" else -drift * xi
    return 1.0 - std_normal_cdf(_u_alpha(alpha) - shift)


def power_optimal_delta(xi, A, B, delta, alpha):
    return power_one_sided(drift_optimal_delta(A, B, delta), abs(xi), alpha)


def power_omnibus_delta(xi, A, B, delta, alpha):
    return power_one_sided(drift_omnibus_delta(A, B, delta), abs(xi), alpha)


def power_optimal_expfam(xi, alpha):
    return power_one_sided(1.0, abs(xi), alpha)


def power_omnibus_expfam(xi, alpha):
    """The omnibus statistic has no asymptotic drift in the exponential family."""
    _u_alpha(alpha)
    return alpha


def are_delta(delta, settings=DEFAULT_QUADRATURE):
    """Asymptotic relative efficiency ``(2 delta + 1) psi(delta)**2`` of the
    omnibus test with respect to the optimal test."""
    return (2.0 * delta + 1.0) * psi(delta, settings) ** 2


def lan_params_delta(xi, A, B, delta):
    if not (A > 0 and B > 0):
        raise DomainError("need A > 0 and B > 0")
    return LanParams(xi * xi * B * B / (A * (2.0 * delta + 1.0)))


def lan_params_expfam(xi):
    return LanParams(xi * xi)


def alternative_mean_sum_delta(xi, A, B, delta):
    """Limit mean of ``Z_n1 + Z_n2`` under the local alternatives."""
    return xi * B * (1.0 + delta) / (math.sqrt(A) * (2.0 * delta + 1.0))


def alternative_var_sum_delta(delta):
    return (1.0 + delta) ** 2 / (2.0 * delta + 1.0)
