"""Standard normal functions, adaptive quadrature and the drift integral psi."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ConvergenceError, DomainError

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_INV_SQRT_2PI = 1.0 / _SQRT_2PI


def std_normal_pdf(x):
    """Standard normal density; accepts scalars or arrays."""
    if np.ndim(x) == 0:
        x = float(x)
        return _INV_SQRT_2PI * math.exp(-0.5 * x * x)
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def std_normal_cdf(x):
    """Standard normal df, evaluated through the complementary error function."""
    if np.ndim(x) == 0:
        return float(ndtr(float(x)))
    return ndtr(np.asarray(x, dtype=float))


# Rational approximation of the normal quantile (P. J. Acklam), |rel err| < 1.2e-9.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _lower_half_quantile(q):
    """Quantile for 0 < q <= 0.5 (array), before polishing."""
    x = np.empty_like(q)
    tail = q < _P_LOW
    if np.any(tail):
        t = np.sqrt(-2.0 * np.log(q[tail]))
        num = ((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5]
        den = (((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0
        x[tail] = num / den
    mid = ~tail
    if np.any(mid):
        s = q[mid] - 0.5
        r = s * s
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num / den
    return x


def std_normal_quantile(p):
    """Inverse of the standard normal df.

    A rational approximation is refined by one Halley step against
    :func:`std_normal_cdf`. The upper half is handled through symmetry so that
    ``1 - p`` is formed exactly.

    Raises :class:`DomainError` unless every ``p`` lies in the open unit interval.
    """
    scalar = np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if not np.all((p > 0.0) & (p < 1.0)):
        raise DomainError("normal quantile requires 0 < p < 1")
    upper = p > 0.5
    q = np.where(upper, 1.0 - p, p)
    x = _lower_half_quantile(q)
    e = ndtr(x) - q
    u = e * _SQRT_2PI * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    x = np.where(upper, -x, x)
    return float(x[0]) if scalar else x


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-10
    max_depth: int = 40
    domain_halfwidth: float = 10.0  # psi is integrated over [-hw, hw]

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be >= 1")
        if self.domain_halfwidth < 6:
            raise DomainError("domain_halfwidth must be >= 6")


DEFAULT_QUADRATURE = QuadratureSettings()


def integrate(f, a, b, settings=DEFAULT_QUADRATURE):
    """Adaptive Simpson quadrature of a scalar function on ``[a, b]``.

    The tolerance is split evenly between the two halves of every bisected
    panel and accepted panels receive the Richardson correction. If some panel
    still misses its tolerance at ``settings.max_depth``, a
    :class:`ConvergenceError` carrying the best estimate is raised.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise DomainError("integrate requires a < b")
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    failed = False
    # explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, settings.abs_tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = f(lm)
        frm = f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        s2 = left + right
        err = s2 - s
        if abs(err) <= 15.0 * tol:
            total += s2 + err / 15.0
        elif depth + 1 >= settings.max_depth:
            failed = True
            total += s2 + err / 15.0
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1))
    if failed:
        raise ConvergenceError(
            f"adaptive Simpson did not reach abs_tol={settings.abs_tol} "
            f"within max_depth={settings.max_depth}", total)
    return total


@functools.lru_cache(maxsize=4096)
def _psi_cached(delta, settings):
    if delta == 0.0:
        # odd integrand on a symmetric window
        return 0.0
    hw = settings.domain_halfwidth

    def g(x):
        cdf = 0.5 * math.erfc(-x / math.sqrt(2.0))
        return x * cdf ** delta * _INV_SQRT_2PI * math.exp(-0.5 * x * x)

    return integrate(g, -hw, hw, settings)


def psi(delta, settings=DEFAULT_QUADRATURE):
    """Drift integral ``int x Phi(x)**delta phi(x) dx`` of the omnibus statistic.

    Memoized per ``(delta, settings)``.
    """
    delta = float(delta)
    if not delta >= 0:
        raise DomainError("psi requires delta >= 0")
    return _psi_cached(delta, settings)
