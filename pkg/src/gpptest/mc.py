"""Monte Carlo harness: size/power, null distribution checks and empirical LAN.

Replication ``r`` of an experiment with master seed ``s`` always draws from
the Philox stream keyed by ``(s, r)``, and results are stored by replication
index before any reduction. Results are therefore identical for every
thread count and scheduling order. The same streams are reused across the
values of xi in a power curve (common random numbers).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import stats

from . import asymptotics as asy
from .errors import GPPTestError, InsufficientDataError, ModelError, ParameterError
from .exceedance import ConditionalSampler, check_threshold, simulate, simulate_functional
from .teststats import central_statistic_delta, loglik_ratio_for_model, omnibus_statistic, z_n1, z_n2
from .special import std_normal_quantile
from .wmodels import Uniform01, validity_range

WILSON_Z99 = 2.5758293035489004  # Phi^{-1}(0.995)


def replication_stream(seed, index):
    """Counter-based generator for replication ``index`` of master ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def wilson_interval(successes, trials, z=WILSON_Z99):
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class MCSummary:
    test: str
    xi: float
    estimate: float
    ci_low: float
    ci_high: float
    R: int
    R_effective: int
    asymptotic_prediction: float
    within_tolerance: bool
    error: Optional[str] = None

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class KSResult:
    statistic: str
    D: float
    critical_value: float
    p_value: float
    R: int
    R_effective: int
    within_tolerance: bool


@dataclass(frozen=True)
class LanCheck:
    model: str
    xi: float
    theta_n: float
    c: float
    mean: float
    mean_ci: tuple
    variance: float
    predicted_mean: float
    predicted_variance: float
    R: int
    mean_ok: bool
    variance_ok: bool

    @property
    def within_tolerance(self):
        return self.mean_ok and self.variance_ok

    def to_dict(self):
        d = asdict(self)
        d["mean_ci"] = list(self.mean_ci)
        d["within_tolerance"] = self.within_tolerance
        return d


class Setup:
    """Everything one value of xi needs: threshold, local alternative, samplers
    and the asymptotic drifts of the optimal and omnibus statistics."""

    def __init__(self, cfg, xi, theta=None):
        self.cfg = cfg
        self.xi = float(xi)
        self.c = cfg.threshold()
        self.law = cfg.inf_law().require_positive()
        self.A = self.law.A
        family = cfg.family()
        if cfg.model == "delta":
            self.delta = cfg.delta
            self.B = self.law.B(self.delta)
            self.theta = asy.theta_n_delta(self.xi, max(cfg.n, 1), self.c, self.delta) if theta is None else theta
            lo, hi = validity_range(family)
            if not lo <= self.theta <= hi:
                raise ParameterError(
                    f"theta_n={self.theta:.6g} for xi={self.xi} lies outside the valid "
                    f"range [{lo:.6g}, {hi:.6g}]; use a smaller |xi|, larger n or smaller u0")
            self.drift = {"optimal": asy.drift_optimal_delta(self.A, self.B, self.delta),
                          "omnibus": asy.drift_omnibus_delta(self.A, self.B, self.delta)}
        else:
            self.delta = None
            self.B = None
            self.theta = asy.theta_n_expfam(self.xi, max(cfg.n, 1), self.c, self.A,
                                            family.C_limit, family.intT) if theta is None else theta
            self.drift = {"optimal": 1.0, "omnibus": 0.0}
        try:
            self.w = family.with_theta(self.theta) if self.theta != 0 else Uniform01()
        except ModelError as exc:
            raise ParameterError(str(exc)) from exc
        self.family = family
        check_threshold(self.c, self.w, self.law)
        if cfg.sampler == "conditional":
            self._conditional = ConditionalSampler(cfg.n, self.c, self.w, self.law)

    def draw(self, rng):
        cfg = self.cfg
        if cfg.sampler == "conditional":
            return self._conditional.draw(rng)
        if cfg.sampler == "direct":
            return simulate(cfg.n, self.c, self.w, self.law, rng)
        grid = np.linspace(0.0, 1.0, cfg.grid_size)
        return simulate_functional(cfg.n, self.c, self.w, cfg.generator, grid, cfg.M, rng)

    def prediction(self, test):
        kind, side = test.split("_")
        if self.cfg.model == "expfam" and kind == "omnibus":
            return asy.power_omnibus_expfam(self.xi, self.cfg.alpha)
        return asy.power_one_sided(self.drift[kind], self.xi, self.cfg.alpha, side)

    def statistics(self, sample):
        """(optimal statistic, omnibus statistic); NaN marks abstention."""
        if self.cfg.model == "delta":
            if sample.tau == 0:
                opt = math.nan
            else:
                opt = central_statistic_delta(z_n1(sample, self.A), z_n2(sample, self.delta), self.delta)
        else:
            opt = z_n1(sample, self.A)
        omni = omnibus_statistic(sample) if sample.tau else math.nan
        return opt, omni


def _map_replications(fn, R, threads):
    """Evaluate ``fn(r)`` for r < R; returns results in index order."""
    if threads <= 1 or R < 2:
        return [fn(r) for r in range(R)]
    chunks = np.array_split(np.arange(R), min(R, 4 * threads))

    def run(idx):
        return [fn(int(r)) for r in idx]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(run, chunks))
    return [x for part in parts for x in part]


def simulate_statistics(cfg, setup, threads=1):
    """Array of shape (R, 3): tau, optimal statistic, omnibus statistic."""

    def one(r):
        sample = setup.draw(replication_stream(cfg.seed, r))
        opt, omni = setup.statistics(sample)
        return sample.tau, opt, omni

    return np.array(_map_replications(one, cfg.replications, threads), dtype=float).reshape(-1, 3)


def summarize(setup, test, stats_table):
    cfg = setup.cfg
    kind, side = test.split("_")
    column = stats_table[:, 1 if kind == "optimal" else 2]
    valid = ~np.isnan(column)
    r_eff = int(valid.sum())
    u = std_normal_quantile(1.0 - cfg.alpha)
    vals = column[valid]
    rejections = int(np.count_nonzero(vals > u if side == "upper" else vals < -u))
    estimate = rejections / r_eff if r_eff else math.nan
    lo, hi = wilson_interval(rejections, r_eff)
    prediction = setup.prediction(test)
    slack = cfg.tolerances.power_slack if setup.xi != 0 else 0.0
    ok = r_eff > 0 and lo - slack <= prediction <= hi + slack
    return MCSummary(test, setup.xi, estimate, lo, hi, cfg.replications, r_eff, prediction, bool(ok))


def estimate_rejection_rate(cfg, test, threads=1, xi=None):
    """Rejection frequency of ``test`` at ``xi`` (default ``cfg.xi``) with its
    99% Wilson interval and the asymptotic power prediction."""
    setup = Setup(cfg, cfg.xi if xi is None else xi)
    return summarize(setup, test, simulate_statistics(cfg, setup, threads))


def power_curve(cfg, xis=None, tests=None, threads=1):
    """One :class:`MCSummary` per (xi, test). A failing xi yields rows carrying
    the error message instead of aborting the whole curve."""
    xis = cfg.xi_list if xis is None else tuple(xis)
    tests = cfg.tests if tests is None else tuple(tests)
    rows = []
    for xi in xis:
        try:
            setup = Setup(cfg, xi)
            table = simulate_statistics(cfg, setup, threads)
        except GPPTestError as exc:
            for test in tests:
                rows.append(MCSummary(test, float(xi), math.nan, math.nan, math.nan,
                                      cfg.replications, 0, math.nan, False, str(exc)))
            continue
        rows.extend(summarize(setup, test, table) for test in tests)
    return rows


def ks_uniformity_check(cfg, statistic="T", threads=1):
    """Null distribution check: ``T`` against N(0, 1) over replications with
    tau > 0, or the pooled exceedance values ``Y`` against U(0, 1).

    Passes when the KS distance is below the 1% critical value 1.63/sqrt(N).
    """
    setup = Setup(cfg, 0.0)
    if statistic == "T":
        table = simulate_statistics(cfg, setup, threads)
        values = table[:, 2]
        values = values[~np.isnan(values)]
        dist = stats.norm.cdf
    elif statistic == "Y":
        samples = _map_replications(
            lambda r: setup.draw(replication_stream(cfg.seed, r)).ys, cfg.replications, threads)
        values = np.concatenate(samples) if samples else np.empty(0)
        dist = stats.uniform.cdf
    else:
        raise ValueError("statistic must be 'T' or 'Y'")
    if values.size < 2:
        raise InsufficientDataError(
            f"KS check needs at least 2 usable values, got {values.size}")
    res = stats.kstest(values, dist)
    crit = 1.63 / math.sqrt(values.size)
    return KSResult(statistic, float(res.statistic), crit, float(res.pvalue),
                    cfg.replications, int(values.size), bool(res.statistic < crit))


def lan_empirical_check(cfg, threads=1, xi=None):
    """Simulate ``L_{n,c_n}(theta_n | 0)`` under the null and compare its mean
    and variance with the LAN limit ``N(-sigma2/2, sigma2)``."""
    xi = cfg.xi if xi is None else float(xi)
    alt = Setup(cfg, xi)
    null = Setup(cfg, xi, theta=0.0)
    if cfg.model == "delta":
        lan = asy.lan_params_delta(xi, alt.A, alt.B, alt.delta)
    else:
        lan = asy.lan_params_expfam(xi)
    if alt.theta == 0:
        values = np.zeros(cfg.replications)
    else:
        llr = loglik_ratio_for_model(alt.w, alt.law, alt.c)

        def one(r):
            return llr(null.draw(replication_stream(cfg.seed, r)))

        values = np.array(_map_replications(one, cfg.replications, threads))
    R = values.size
    mean = float(values.mean())
    var = float(values.var(ddof=1)) if R > 1 else 0.0
    half = WILSON_Z99 * math.sqrt(var / R) if R > 1 else 0.0
    tol = cfg.tolerances
    mean_err = abs(mean - lan.mean_h0)
    mean_ok = mean_err <= tol.lan_abs_mean or mean_err <= tol.lan_rel * abs(lan.mean_h0)
    if lan.degenerate:
        var_ok = var == 0.0
    else:
        var_ok = abs(var - lan.sigma2) <= tol.lan_rel * lan.sigma2
    return LanCheck(cfg.model, xi, alt.theta, alt.c, mean, (mean - half, mean + half), var,
                    lan.mean_h0, lan.sigma2, R, bool(mean_ok), bool(var_ok))
