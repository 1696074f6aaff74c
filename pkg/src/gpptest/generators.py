"""Generator processes Z and the law of their path infimum.

Every test statistic depends on the generator only through the distribution
of ``inf_t Z_t``; :class:`InfLaw` is the interface the rest of the package
consumes. Full paths are available for validation and for the functional
(path-level) sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ModelError

MAX_ATOMS = 10**6


@dataclass(frozen=True)
class InfLaw:
    """Discrete law of ``inf_t Z_t`` on ``[0, m]``.

    ``A = E(inf Z)`` and ``B(delta) = E((inf Z)**(1 + delta))``.
    ``A > 0`` is not enforced here so that degenerate generators can be
    reported; samplers and statistics call :meth:`require_positive`.
    """

    atoms: np.ndarray
    weights: np.ndarray
    m: float

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if atoms.shape != weights.shape or atoms.size == 0:
            raise ModelError("inf law needs equally many atoms and weights (at least one)")
        if atoms.size > MAX_ATOMS:
            raise ModelError(f"inf law is capped at {MAX_ATOMS} atoms")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ModelError(f"inf law weights must be nonnegative and sum to 1 (sum={weights.sum()!r})")
        if np.any(atoms < 0) or np.any(atoms > self.m):
            raise ModelError(f"inf law atoms must lie in [0, m={self.m}]")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "m", float(self.m))

    @classmethod
    def point(cls, z, m=None):
        return cls(np.array([z]), np.array([1.0]), z if m is None else m)

    @classmethod
    def empirical(cls, minima, m):
        """Equal-weight law on sorted sample minima."""
        minima = np.sort(np.asarray(minima, dtype=float))
        return cls(minima, np.full(minima.size, 1.0 / minima.size), m)

    @property
    def A(self):
        return float(np.dot(self.weights, self.atoms))

    def B(self, delta):
        return float(np.dot(self.weights, self.atoms ** (1.0 + delta)))

    def require_positive(self):
        if not self.A > 0:
            raise ModelError("E(inf_t Z_t) must be positive")
        return self

    def sample(self, rng, size):
        if self.atoms.size == 1:
            return np.full(size, self.atoms[0])
        return rng.choice(self.atoms, size=size, p=self.weights)


class _Generator:
    """Shared behaviour of the generator variants."""

    bound: float

    def mean_on_grid(self, grid):
        """Analytic E(Z_t) on ``grid``, or ``None`` if not available."""
        return None

    def sample_paths(self, grid, rng, size):
        raise ModelError(f"{type(self).__name__} has no path representation")

    def sample_path(self, grid, rng):
        return self.sample_paths(grid, rng, 1)[0]

    def exact_inf_law(self, grid_size):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(_Generator):
    """``Z_t = 1`` for all t."""

    value: float = 1.0

    def __post_init__(self):
        if self.value != 1.0:
            raise ModelError("a constant generator must equal 1 to have E(Z_t) = 1")

    @property
    def bound(self):
        return 1.0

    def mean_on_grid(self, grid):
        return np.ones(len(grid))

    def sample_paths(self, grid, rng, size):
        return np.ones((size, len(grid)))

    def exact_inf_law(self, grid_size):
        return InfLaw.point(1.0, m=1.0)


@dataclass(frozen=True)
class SinePhase(_Generator):
    """``Z_t = 1 + a sin(2 pi (t + S))`` with a uniform random phase S.

    Every path attains its minimum ``1 - a``.
    """

    amplitude: float

    def __post_init__(self):
        if not 0.0 <= self.amplitude <= 1.0:
            raise ModelError("sine-phase amplitude must lie in [0, 1]")

    @property
    def bound(self):
        return 1.0 + self.amplitude

    def path(self, grid, phase):
        grid = np.asarray(grid, dtype=float)
        return 1.0 + self.amplitude * np.sin(2.0 * np.pi * (grid + phase))

    def sample_paths(self, grid, rng, size, phases=None):
        grid = np.asarray(grid, dtype=float)
        if phases is None:
            phases = rng.random(size)
        phases = np.asarray(phases, dtype=float).reshape(-1, 1)
        return 1.0 + self.amplitude * np.sin(2.0 * np.pi * (grid[None, :] + phases))

    def exact_inf_law(self, grid_size):
        return InfLaw.point(1.0 - self.amplitude, m=self.bound)


@dataclass(frozen=True)
class FiniteMixture(_Generator):
    """Z equals one of k tabulated functions, each chosen with probability 1/k.

    ``functions`` has shape ``(k, len(grid))``; paths between nodes are linear,
    so the grid minimum of each function is its exact infimum.
    """

    functions: np.ndarray
    grid: np.ndarray
    m: Optional[float] = None

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.functions, dtype=float))
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size < 2 or f.shape[1] != g.size:
            raise ModelError("mixture functions must be tabulated on a common grid of >= 2 nodes")
        if g[0] != 0.0 or g[-1] != 1.0 or np.any(np.diff(g) <= 0):
            raise ModelError("mixture grid must increase from 0 to 1")
        m = float(f.max()) if self.m is None else float(self.m)
        if np.any(f < 0) or np.any(f > m):
            raise ModelError(f"mixture functions must lie in [0, m={m}]")
        if np.max(np.abs(f.mean(axis=0) - 1.0)) > 1e-9:
            raise ModelError("mixture functions must average to 1 at every grid node")
        f.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "functions", f)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "m", m)

    @property
    def bound(self):
        return self.m

    def _interp(self, grid):
        grid = np.asarray(grid, dtype=float)
        return np.array([np.interp(grid, self.grid, fj) for fj in self.functions])

    def mean_on_grid(self, grid):
        return self._interp(grid).mean(axis=0)

    def sample_paths(self, grid, rng, size):
        table = self._interp(grid)
        return table[rng.integers(0, table.shape[0], size=size)]

    def exact_inf_law(self, grid_size):
        k = self.functions.shape[0]
        return InfLaw(self.functions.min(axis=1), np.full(k, 1.0 / k), self.m)


@dataclass(frozen=True)
class ExplicitInfLaw(_Generator):
    """A user-supplied law of ``inf_t Z_t`` without path representation."""

    law: InfLaw

    @property
    def bound(self):
        return self.law.m

    def exact_inf_law(self, grid_size):
        return self.law


def inf_law(gen, grid_size=512, mc_samples=0, seed=0):
    """Law of ``inf_t Z_t`` for ``gen``.

    With ``mc_samples == 0`` the exact law is returned. Otherwise ``mc_samples``
    paths are drawn and their minima over a uniform grid of ``grid_size`` nodes
    form an equal-weight empirical law (biased upward by grid resolution).
    """
    if grid_size < 2:
        raise ModelError("grid_size must be >= 2")
    if mc_samples <= 0:
        return gen.exact_inf_law(grid_size)
    grid = np.linspace(0.0, 1.0, grid_size)
    rng = np.random.default_rng(seed)
    minima = np.empty(mc_samples)
    chunk = max(1, 2**22 // grid_size)
    for start in range(0, mc_samples, chunk):
        stop = min(mc_samples, start + chunk)
        minima[start:stop] = gen.sample_paths(grid, rng, stop - start).min(axis=1)
    return InfLaw.empirical(minima, gen.bound)


@dataclass
class ValidationReport:
    grid: np.ndarray
    means: Optional[np.ndarray]
    standard_errors: Optional[np.ndarray]
    max_mean_deviation: Optional[float]
    mean_ok: bool
    bound_violations: int
    A: float
    A_positive: bool
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return self.mean_ok and self.bound_violations == 0 and self.A_positive

    def to_dict(self):
        return {
            "ok": self.ok,
            "max_mean_deviation": self.max_mean_deviation,
            "mean_ok": self.mean_ok,
            "bound_violations": self.bound_violations,
            "A": self.A,
            "A_positive": self.A_positive,
            "notes": list(self.notes),
        }


def validate_generator(gen, grid_size=64, mc_samples=10**5, seed=0):
    """Check the generator constraints ``0 <= Z_t <= m``, ``E(Z_t) = 1`` and ``A > 0``.

    Means are analytic where available (constant, mixture) and Monte Carlo
    otherwise; a Monte Carlo mean passes when it is within 3 standard errors
    of 1. Violations are reported, never raised.
    """
    if grid_size < 2:
        raise ModelError("grid_size must be >= 2")
    grid = np.linspace(0.0, 1.0, grid_size)
    notes = []
    means = se = None
    max_dev = None
    mean_ok = True
    violations = 0

    if isinstance(gen, ExplicitInfLaw):
        notes.append("explicit inf law: no paths, mean and bound checks skipped")
    else:
        rng = np.random.default_rng(seed)
        paths = gen.sample_paths(grid, rng, mc_samples)
        violations = int(np.count_nonzero((paths < 0) | (paths > gen.bound)))
        analytic = gen.mean_on_grid(grid)
        if analytic is not None:
            means = analytic
            se = np.zeros(grid_size)
            max_dev = float(np.max(np.abs(means - 1.0)))
            mean_ok = max_dev <= 1e-9
        else:
            means = paths.mean(axis=0)
            se = paths.std(axis=0, ddof=1) / np.sqrt(mc_samples)
            dev = np.abs(means - 1.0)
            max_dev = float(dev.max())
            # zero-variance nodes must hit 1 exactly
            mean_ok = bool(np.all(dev <= np.maximum(3.0 * se, 1e-12)))
            notes.append(f"Monte Carlo means from {mc_samples} paths")

    A = gen.exact_inf_law(grid_size).A
    if not A > 0:
        notes.append("E(inf_t Z_t) = 0: the generator is not bounded away from zero")
    return ValidationReport(grid, means, se, max_dev, mean_ok, violations, A, A > 0, notes)
