"""Simulation of the point process of exceedances above a constant threshold.

An observation ``X_t = max(-W / Z_t, M)`` exceeds the threshold line ``c < 0``
iff ``W <= |c| inf_t Z_t``; its exceedance value is
``Y = sup_t X_t / c = W / (|c| inf_t Z_t)``. Only the law of ``inf_t Z_t``
enters, which the reduced samplers exploit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ModelError
from .wmodels import Uniform01


@dataclass(frozen=True)
class ExceedanceSample:
    """Count ``tau`` and values ``ys`` of the exceedances among ``n`` observations."""

    n: int
    c: float
    tau: int
    ys: np.ndarray

    def __post_init__(self):
        ys = np.asarray(self.ys, dtype=float).ravel()
        if not self.c < 0:
            raise ModelError("threshold c must be negative")
        if not 0 <= self.tau <= self.n or self.tau != ys.size:
            raise ModelError("need 0 <= tau <= n and tau == len(ys)")
        if ys.size and (ys.min() < 0.0 or ys.max() > 1.0):
            raise ModelError("exceedance values must lie in [0, 1]")
        ys.setflags(write=False)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_values(cls, n, c, ys):
        ys = np.asarray(ys, dtype=float)
        return cls(n, c, ys.size, ys)


@dataclass(frozen=True)
class ThresholdSchedule:
    """Threshold sequence ``c_n = -c0 * n**(-gamma)``."""

    c0: float = 0.1
    gamma: float = 1.0 / 6.0

    def __post_init__(self):
        if not (self.c0 > 0 and self.gamma > 0):
            raise ConfigError("threshold schedule needs c0 > 0 and gamma > 0")

    def c(self, n):
        return -self.c0 * float(n) ** (-self.gamma)

    def check(self, model, delta=None):
        """Growth condition: ``n|c_n|^(1+2 delta) -> inf`` (delta model) or ``n|c_n| -> inf``."""
        if model == "delta":
            bound = 1.0 / (1.0 + 2.0 * delta)
            if not self.gamma < bound:
                raise ConfigError(
                    f"gamma={self.gamma} violates gamma < 1/(1+2 delta) = {bound}",
                    "threshold.schedule.gamma")
        elif not self.gamma < 1.0:
            raise ConfigError(f"gamma={self.gamma} violates gamma < 1", "threshold.schedule.gamma")


def default_schedule(model, delta=None):
    """Default schedule: ``c0 = 0.1``; ``gamma`` halfway to the admissibility
    boundary ``1/(1+2 delta)`` for the delta model, ``1/6`` for the exponential family."""
    if model == "delta":
        return ThresholdSchedule(0.1, 1.0 / (2.0 * (1.0 + 2.0 * delta)))
    return ThresholdSchedule(0.1, 1.0 / 6.0)


def check_threshold(c, w, law):
    """Threshold guard ``|c| m <= w.max_scale`` (``u0`` for delta models)."""
    if not c < 0:
        raise ConfigError(f"threshold c={c} must be negative", "threshold.c")
    if abs(c) * law.m > w.max_scale:
        raise ConfigError(
            f"|c| m = {abs(c) * law.m:.6g} exceeds {w.max_scale:.6g} for {type(w).__name__}",
            "threshold")


def exceedance_value(w_value, inf_z, c):
    """``W / (|c| inf Z)``, with ``+inf`` where ``inf Z = 0``."""
    w_value = np.asarray(w_value, dtype=float)
    inf_z = np.asarray(inf_z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = w_value / (abs(c) * inf_z)
    return np.where(inf_z > 0, y, np.inf)


def functional_exceedance_value(w_value, z_paths, c, M):
    """``sup_t X_t / c`` for paths ``X_t = max(-W / Z_t, M)`` on a grid.

    ``z_paths`` has shape ``(n, grid)`` (or ``(grid,)`` for one path).
    """
    z = np.atleast_2d(np.asarray(z_paths, dtype=float))
    w_value = np.atleast_1d(np.asarray(w_value, dtype=float))[:, None]
    with np.errstate(divide="ignore"):
        x = np.maximum(-w_value / z, M)
    out = (x / c).max(axis=1)
    return out if np.ndim(z_paths) == 2 else float(out[0])


def exceedance_probability(w, law, c):
    """``P(X >= c) = sum_i p_i H(|c| z_i)``."""
    check_threshold(c, w, law)
    return float(np.dot(law.weights, w.cdf(abs(c) * law.atoms)))


def simulate(n, c, w, law, rng):
    """Reduced per-observation sampler: draws ``(W_i, inf Z_i)`` for every i <= n."""
    check_threshold(c, w, law)
    law.require_positive()
    wv = w.sample(rng, n)
    iz = law.sample(rng, n)
    y = exceedance_value(wv, iz, c)
    ys = y[y <= 1.0]
    return ExceedanceSample(n, c, ys.size, ys)


class ConditionalSampler:
    """Exact sampler drawing the count first and then the exceedance values.

    ``tau ~ Binomial(n, P(X >= c))`` and, independently, i.i.d. values with
    the conditional law of Y: pick an atom z of the inf law with probability
    proportional to ``p_z H(|c| z)``, draw W from H truncated to
    ``[0, |c| z]`` and return ``W / (|c| z)``. The cost is proportional to
    the number of exceedances rather than to ``n``.
    """

    def __init__(self, n, c, w, law):
        check_threshold(c, w, law)
        law.require_positive()
        self.n = int(n)
        self.c = float(c)
        self.w = w
        keep = law.atoms > 0
        self.atoms = law.atoms[keep]
        self.levels = abs(c) * self.atoms
        mass = law.weights[keep] * w.cdf(self.levels)
        self.p = float(mass.sum())
        self.atom_probs = mass / self.p if self.p > 0 else mass
        self._uniform = isinstance(w, Uniform01)

    def draw(self, rng):
        tau = int(rng.binomial(self.n, self.p)) if self.n > 0 else 0
        if tau == 0:
            return ExceedanceSample(self.n, self.c, 0, np.empty(0))
        if self.atoms.size == 1:
            levels = np.full(tau, self.levels[0])
        else:
            levels = self.levels[rng.choice(self.atoms.size, size=tau, p=self.atom_probs)]
        if self._uniform:
            ys = rng.random(tau)
        else:
            ys = np.minimum(self.w.sample_below(levels, rng) / levels, 1.0)
        return ExceedanceSample(self.n, self.c, tau, ys)


def simulate_conditional(n, c, w, law, rng):
    return ConditionalSampler(n, c, w, law).draw(rng)


def simulate_functional(n, c, w, gen, grid, M, rng, chunk=4096):
    """Path-level sampler: builds ``X_t = max(-W/Z_t, M)`` on ``grid`` and keeps
    observations with ``X_t >= c`` at every grid node."""
    if not M < c < 0:
        raise ConfigError(f"need M < c < 0 (got M={M}, c={c})", "M")
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0) or np.any(grid > 1) or np.any(np.diff(grid) < 0):
        raise ConfigError("grid must be sorted within [0, 1]", "grid_size")
    if abs(c) * gen.bound > w.max_scale:
        raise ConfigError(f"|c| m exceeds {w.max_scale} for {type(w).__name__}", "threshold")
    kept = []
    for start in range(0, n, chunk):
        size = min(chunk, n - start)
        z = gen.sample_paths(grid, rng, size)
        wv = w.sample(rng, size)
        y = functional_exceedance_value(wv, z, c, M)
        kept.append(y[y <= 1.0])
    ys = np.concatenate(kept) if kept else np.empty(0)
    return ExceedanceSample(n, c, ys.size, ys)
