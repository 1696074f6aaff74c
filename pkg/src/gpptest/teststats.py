"""Test statistics, one-sided test decisions and the exact log-likelihood ratio."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LikelihoodError, NoExceedanceError
from .exceedance import check_threshold, exceedance_probability
from .special import std_normal_cdf, std_normal_quantile
from .wmodels import Uniform01

UPPER = "upper"
LOWER = "lower"
CLAMP_EPS = 1e-15


class ClampWarning(UserWarning):
    """An exceedance value of exactly 0 or 1 was clamped before Phi^{-1}."""


@dataclass(frozen=True)
class TestOutcome:
    statistic: float
    critical_value: float
    alpha: float
    reject: bool
    p_value: float
    side: str
    abstained: bool = False

    __test__ = False  # not a pytest class


def critical_value(alpha, side):
    _check_alpha(alpha)
    u = std_normal_quantile(1.0 - alpha)
    return u if side == UPPER else -u


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")


def decide(statistic, alpha, side):
    """One-sided decision against ``u_alpha`` (upper) or ``-u_alpha`` (lower)."""
    if side not in (UPPER, LOWER):
        raise DomainError(f"side must be {UPPER!r} or {LOWER!r}")
    cv = critical_value(alpha, side)
    if side == UPPER:
        return TestOutcome(statistic, cv, alpha, statistic > cv, 1.0 - std_normal_cdf(statistic), side)
    return TestOutcome(statistic, cv, alpha, statistic < cv, std_normal_cdf(statistic), side)


def abstain(alpha, side):
    _check_alpha(alpha)
    return TestOutcome(math.nan, critical_value(alpha, side), alpha, False, 1.0, side, abstained=True)


def z_n1(sample, A):
    """Standardized exceedance count ``(tau - n|c|A) / sqrt(n|c|A)``."""
    mean = sample.n * abs(sample.c) * A
    if not mean > 0:
        raise DomainError("z_n1 needs n |c| A > 0")
    return (sample.tau - mean) / math.sqrt(mean)


def z_n2(sample, delta):
    """``(1+delta) / sqrt(tau) * sum(Y_k**delta - 1/(1+delta))``."""
    if sample.tau == 0:
        raise NoExceedanceError("z_n2 needs at least one exceedance")
    d1 = 1.0 + delta
    return d1 / math.sqrt(sample.tau) * float(np.sum(sample.ys ** delta - 1.0 / d1))


def central_statistic_delta(z1, z2, delta):
    """Central sequence of the delta model, normalized to unit null variance."""
    return math.sqrt(2.0 * delta + 1.0) / (1.0 + delta) * (z1 + z2)


def optimal_test_delta(sample, A, delta, alpha, side=UPPER):
    if sample.tau == 0:
        return abstain(alpha, side)
    stat = central_statistic_delta(z_n1(sample, A), z_n2(sample, delta), delta)
    return decide(stat, alpha, side)


def optimal_test_expfam(sample, A, alpha, side=UPPER):
    """Count-only test; ``tau = 0`` is an ordinary value of the statistic."""
    return decide(z_n1(sample, A), alpha, side)


def omnibus_statistic(sample):
    """``tau**(-1/2) sum Phi^{-1}(Y_k)``; exactly N(0, 1) under the null given tau > 0."""
    if sample.tau == 0:
        raise NoExceedanceError("the omnibus statistic needs at least one exceedance")
    ys = sample.ys
    edge = (ys <= 0.0) | (ys >= 1.0)
    if np.any(edge):
        warnings.warn(f"{int(edge.sum())} exceedance value(s) clamped away from 0/1", ClampWarning)
        ys = np.clip(ys, CLAMP_EPS, 1.0 - CLAMP_EPS)
    return float(np.sum(std_normal_quantile(ys))) / math.sqrt(sample.tau)


def omnibus_test(sample, alpha, side=UPPER):
    if sample.tau == 0:
        return abstain(alpha, side)
    return decide(omnibus_statistic(sample), alpha, side)


def exceedance_density(w, law, c, u):
    """``f(u) = |c| sum_i p_i z_i h(|c| z_i u)``, the density of ``sup_t X_t / c``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    ac = abs(c)
    keep = law.atoms > 0
    atoms, weights = law.atoms[keep], law.weights[keep]
    out = np.zeros(u.size)
    step = max(1, 2**21 // max(1, atoms.size))
    for start in range(0, u.size, step):
        uu = u[start:start + step]
        h = w.density(ac * atoms[:, None] * uu[None, :])
        out[start:start + step] = ac * ((weights * atoms) @ h)
    return out


def loglik_ratio(sample, theta, family, law):
    """Exact ``L_{n,c}(theta | 0)`` of the exceedance point process.

    ``family.with_theta(theta)`` is the alternative W-model; its null member
    is the uniform distribution. Using ``f_0 = P_0 = |c| A`` the per-point and
    count terms combine into
    ``sum_k log(f_theta(Y_k) / f_0(Y_k)) + (n - tau) log((1 - P_theta) / (1 - P_0))``.
    """
    if theta == 0:
        return 0.0
    return loglik_ratio_for_model(family.with_theta(theta), law, sample.c)(sample)


def loglik_ratio_for_model(w, law, c):
    """Precompute the log-likelihood ratio of alternative W-model ``w`` against
    the uniform null at threshold ``c``; returns a function of the sample."""
    check_threshold(c, Uniform01(), law)
    check_threshold(c, w, law)
    law.require_positive()
    p0 = abs(c) * law.A
    pt = exceedance_probability(w, law, c)
    count_term = math.log1p(-(pt - p0) / (1.0 - p0)) if pt < 1.0 else -math.inf

    def llr(sample):
        if sample.c != c:
            raise DomainError(f"sample threshold {sample.c} differs from {c}")
        total = 0.0
        if sample.tau:
            ratio = exceedance_density(w, law, c, sample.ys) / p0
            if not np.all(ratio > 0):
                raise LikelihoodError("exceedance density is not positive at an observed value")
            total += float(np.sum(np.log(ratio)))
        if sample.n > sample.tau:
            if not pt < 1.0:
                raise LikelihoodError("P_theta(X >= c) = 1 with non-exceedances observed")
            total += (sample.n - sample.tau) * count_term
        return total

    return llr
