"""Parametric families for the radial variable W.

``Uniform01`` is the null model (the standard generalized Pareto process).
``DeltaModel`` realizes the delta-neighborhood family as exactly
``1 + theta u**delta`` on ``[0, u0]`` with a flat tail on ``(u0, 1]`` carrying
the remaining mass. ``ExpFamilyModel`` has density ``C(theta) exp(theta T(u))``
on ``[0, 1]``.

All models are immutable and vectorized; every sampler inverts the df.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, ModelError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _as_array(u):
    scalar = np.ndim(u) == 0
    return scalar, np.atleast_1d(np.asarray(u, dtype=float))


def _out(scalar, x):
    return float(x[0]) if scalar else x


def _solve_increasing(F, f, target, lo, hi, tol=1e-14, max_iter=100):
    """Solve ``F(x) = target`` for increasing F on brackets ``[lo, hi]`` (arrays).

    Newton steps with density ``f``; falls back to bisection whenever a step
    leaves the current bracket.
    """
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    x = 0.5 * (lo + hi)
    scale = 4.0 * np.finfo(float).eps * (np.abs(target) + np.finfo(float).tiny)
    for _ in range(max_iter):
        r = F(x) - target
        settled = np.abs(r) <= scale
        if np.all(settled):
            break
        lo = np.where(r <= 0, x, lo)
        hi = np.where(r > 0, x, hi)
        d = f(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - r / d
        bad = ~np.isfinite(step) | (step < lo) | (step > hi)
        x_new = np.where(settled, x, np.where(bad, 0.5 * (lo + hi), step))
        done = settled | (np.abs(x_new - x) <= tol * np.abs(x_new)) | (hi - lo <= tol * np.abs(hi))
        x = x_new
        if np.all(done):
            break
    return x


class WModel:
    """Common interface of the W families."""

    #: largest admissible ``|c| * m`` for simulation
    max_scale = 1.0
    support_upper = 1.0

    def _check_support(self, u):
        if np.any(u < 0) or np.any(u > self.support_upper):
            raise DomainError(f"u outside the support [0, {self.support_upper}] of {self!r}")

    def density(self, u):
        raise NotImplementedError

    def cdf(self, u):
        raise NotImplementedError

    def ppf(self, p):
        raise NotImplementedError

    def sample(self, rng, size=None):
        if size is None:
            return self.ppf(rng.random())
        return self.ppf(rng.random(size))

    def sample_below(self, upper, rng):
        """Draw W conditionally on ``W <= upper`` (one draw per entry of ``upper``)."""
        upper = np.asarray(upper, dtype=float)
        return self.ppf(rng.random(upper.shape) * self.cdf(upper))

    def with_theta(self, theta):
        raise ModelError(f"{type(self).__name__} is not a parametric family")


@dataclass(frozen=True)
class Uniform01(WModel):
    """Uniform distribution on (0, 1); the null hypothesis."""

    theta = 0.0

    def density(self, u):
        scalar, u = _as_array(u)
        self._check_support(u)
        return _out(scalar, np.ones_like(u))

    def cdf(self, u):
        scalar, u = _as_array(u)
        return _out(scalar, np.clip(u, 0.0, 1.0))

    def ppf(self, p):
        scalar, p = _as_array(p)
        return _out(scalar, p.copy())

    def sample_below(self, upper, rng):
        upper = np.minimum(np.asarray(upper, dtype=float), 1.0)
        return rng.random(upper.shape) * upper


@dataclass(frozen=True)
class StdExponential(WModel):
    """Standard exponential W; in the delta-neighborhood with delta=1, theta=-1."""

    max_scale = math.inf
    support_upper = math.inf
    delta = 1.0
    theta = -1.0

    def density(self, u):
        scalar, u = _as_array(u)
        self._check_support(u)
        return _out(scalar, np.exp(-u))

    def cdf(self, u):
        scalar, u = _as_array(u)
        return _out(scalar, -np.expm1(-np.maximum(u, 0.0)))

    def ppf(self, p):
        scalar, p = _as_array(p)
        return _out(scalar, -np.log1p(-p))


@dataclass(frozen=True)
class DeltaModel(WModel):
    """Density ``1 + theta u**delta`` on ``[0, u0]`` and constant on ``(u0, 1]``."""

    delta: float
    theta: float = 0.0
    u0: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ModelError("delta must lie in (0, 1]")
        if not 0.0 < self.u0 < 1.0:
            raise ModelError("u0 must lie in (0, 1)")
        lo, hi = validity_range(self)
        if not lo <= self.theta <= hi:
            raise ModelError(
                f"theta={self.theta} outside the valid range [{lo}, {hi}] "
                f"for delta={self.delta}, u0={self.u0}")

    @property
    def max_scale(self):
        return self.u0

    @property
    def head_mass(self):
        """``H(u0)``."""
        d1 = 1.0 + self.delta
        return self.u0 + self.theta * self.u0 ** d1 / d1

    @property
    def tail_density(self):
        return (1.0 - self.head_mass) / (1.0 - self.u0)

    def with_theta(self, theta):
        return replace(self, theta=float(theta))

    def density(self, u):
        scalar, u = _as_array(u)
        self._check_support(u)
        out = np.where(u <= self.u0, 1.0 + self.theta * u ** self.delta, self.tail_density)
        return _out(scalar, out)

    def cdf(self, u):
        scalar, u = _as_array(u)
        d1 = 1.0 + self.delta
        v = np.clip(u, 0.0, 1.0)
        head = v + self.theta * v ** d1 / d1
        tail = self.head_mass + self.tail_density * (v - self.u0)
        out = np.where(v <= self.u0, head, tail)
        return _out(scalar, np.minimum(out, 1.0))

    def ppf(self, p):
        scalar, p = _as_array(p)
        hm = self.head_mass
        out = np.empty_like(p)
        head = p <= hm
        ph = p[head]
        if self.theta == 0.0:
            out[head] = ph
        elif self.delta == 1.0:
            # root of theta/2 u^2 + u - p in cancellation-free form
            out[head] = 2.0 * ph / (1.0 + np.sqrt(1.0 + 2.0 * self.theta * ph))
        else:
            d1 = 1.0 + self.delta
            out[head] = _solve_increasing(
                lambda x: x + self.theta * x ** d1 / d1,
                lambda x: 1.0 + self.theta * x ** self.delta,
                ph, np.zeros_like(ph), np.full_like(ph, self.u0))
        td = self.tail_density
        if np.any(~head):
            if td > 0:
                out[~head] = self.u0 + (p[~head] - hm) / td
            else:
                out[~head] = self.u0
        return _out(scalar, np.clip(out, 0.0, 1.0))


def validity_range(model):
    """Interval of theta for which the delta-model density stays nonnegative.

    ``1 + theta u0**delta >= 0`` bounds theta below and a nonnegative tail
    density bounds it above.
    """
    delta, u0 = model.delta, model.u0
    return -(u0 ** -delta), (1.0 - u0) * (1.0 + delta) / u0 ** (1.0 + delta)


# --- exponential family -----------------------------------------------------


@dataclass(frozen=True)
class IdentityT:
    """``T(u) = u``."""

    name = "identity"
    limit0 = 0.0
    integral = 0.5
    breakpoints = ()

    def __call__(self, u):
        return np.asarray(u, dtype=float)

    def to_dict(self):
        return {"name": self.name}


@dataclass(frozen=True)
class PlateauT:
    """``T(u) = min(u, tau)``."""

    tau: float
    name = "plateau"
    limit0 = 0.0

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ModelError("plateau level tau must lie in (0, 1]")

    @property
    def integral(self):
        return self.tau - 0.5 * self.tau ** 2

    @property
    def breakpoints(self):
        return (self.tau,)

    def __call__(self, u):
        return np.minimum(np.asarray(u, dtype=float), self.tau)

    def to_dict(self):
        return {"name": self.name, "tau": self.tau}


@dataclass(frozen=True)
class TabulatedT:
    """Piecewise-linear T through the points ``(u[i], t[i])``, ``u[0]=0, u[-1]=1``."""

    u: tuple
    t: tuple
    name = "tabulated"

    def __post_init__(self):
        u = tuple(float(x) for x in self.u)
        t = tuple(float(x) for x in self.t)
        if len(u) != len(t) or len(u) < 2:
            raise ModelError("tabulated T needs matching u and t lists of length >= 2")
        if u[0] != 0.0 or u[-1] != 1.0 or any(b <= a for a, b in zip(u, u[1:])):
            raise ModelError("tabulated T nodes must increase from 0 to 1")
        if not all(math.isfinite(x) for x in t):
            raise ModelError("tabulated T values must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", t)

    @property
    def limit0(self):
        return self.t[0]

    @property
    def integral(self):
        return float(np.trapezoid(self.t, self.u))

    @property
    def breakpoints(self):
        return self.u[1:-1]

    def __call__(self, u):
        return np.interp(np.asarray(u, dtype=float), self.u, self.t)

    def to_dict(self):
        return {"name": self.name, "u": list(self.u), "t": list(self.t)}


def make_T(spec):
    """Build a T function from a config mapping ``{"name": ..., ...}``."""
    name = spec.get("name")
    if name == "identity":
        return IdentityT()
    if name == "plateau":
        return PlateauT(float(spec["tau"]))
    if name == "tabulated":
        return TabulatedT(tuple(spec["u"]), tuple(spec["t"]))
    raise ModelError(f"unknown T function {name!r}")


@dataclass(frozen=True)
class ExpFamilyModel(WModel):
    """Density ``C(theta) exp(theta T(u))`` on ``[0, 1]``.

    The df is tabulated once on ``n_cells`` uniform cells (refined at the
    breakpoints of T) by 16-point Gauss-Legendre per cell. Evaluation adds a
    Gauss-Legendre integral over the partial cell, so the df is monotone and
    accurate to rounding for piecewise smooth T.
    """

    T: object = field(default_factory=IdentityT)
    theta: float = 0.0
    n_cells: int = 4096

    def __post_init__(self):
        inner = [b for b in self.T.breakpoints if 0.0 < b < 1.0]
        nodes = np.unique(np.concatenate([np.linspace(0.0, 1.0, self.n_cells + 1), inner]))
        cells = self._gl(nodes[:-1], nodes[1:])
        cum = np.concatenate([[0.0], np.cumsum(cells)])
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "C_of_theta", 1.0 / cum[-1])

    def _kernel(self, u):
        return np.exp(self.theta * self.T(u))

    def _gl(self, a, b):
        """Integral of exp(theta T) over [a, b], elementwise."""
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        x = mid[:, None] + half[:, None] * _GL_X[None, :]
        return half * (self._kernel(x) @ _GL_W)

    @property
    def C_limit(self):
        return self.T.limit0

    @property
    def intT(self):
        return self.T.integral

    def with_theta(self, theta):
        return ExpFamilyModel(self.T, float(theta), self.n_cells)

    def _cell(self, u):
        k = np.searchsorted(self._nodes, u, side="right") - 1
        return np.clip(k, 0, self._nodes.size - 2)

    def _unnormalized_cdf(self, u):
        k = self._cell(u)
        return self._cum[k] + self._gl(self._nodes[k], u)

    def density(self, u):
        scalar, u = _as_array(u)
        self._check_support(u)
        return _out(scalar, self.C_of_theta * self._kernel(u))

    def cdf(self, u):
        scalar, u = _as_array(u)
        v = np.clip(u, 0.0, 1.0)
        out = np.minimum(self.C_of_theta * self._unnormalized_cdf(v), 1.0)
        return _out(scalar, out)

    def ppf(self, p):
        scalar, p = _as_array(p)
        if self.theta == 0.0:
            return _out(scalar, p.copy())
        target = p / self.C_of_theta
        k = np.clip(np.searchsorted(self._cum, target, side="right") - 1, 0, self._nodes.size - 2)
        lo = self._nodes[k]
        hi = self._nodes[k + 1]
        x = _solve_increasing(self._unnormalized_cdf, self._kernel, target, lo, hi)
        return _out(scalar, np.clip(x, 0.0, 1.0))

