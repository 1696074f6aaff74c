import math

import numpy as np
import pytest
from scipy import stats

from gpptest import mc
from gpptest.config import ExperimentConfig
from gpptest.errors import InsufficientDataError, ParameterError

DELTA = {
    "model": "delta",
    "generator": {"variant": "constant"},
    "w": {"delta": 1.0},
    "n": 10_000,
    "replications": 400,
    "seed": 99,
    "tests": ["optimal_upper", "optimal_lower", "omnibus_upper", "omnibus_lower"],
}
EXPFAM = {**DELTA, "model": "expfam", "w": {"T": {"name": "identity"}}}


def cfg(base=DELTA, **kw):
    return ExperimentConfig.from_dict({**base, **kw})


class TestStreams:
    def test_same_key_same_stream(self):
        a = mc.replication_stream(5, 17).random(8)
        b = mc.replication_stream(5, 17).random(8)
        np.testing.assert_array_equal(a, b)

    def test_distinct_keys_differ(self):
        draws = {tuple(mc.replication_stream(s, r).random(2)) for s in (0, 1) for r in range(50)}
        assert len(draws) == 100

    def test_full_64_bit_seed(self):
        assert mc.replication_stream(2**64 - 1, 0).random() < 1.0


class TestWilson:
    @pytest.mark.parametrize("k,n", [(0, 10), (3, 10), (500, 10_000), (10_000, 10_000)])
    def test_against_scipy(self, k, n):
        ref = stats.binomtest(k, n).proportion_ci(confidence_level=0.99, method="wilson")
        lo, hi = mc.wilson_interval(k, n)
        assert lo == pytest.approx(ref.low, abs=1e-12)
        assert hi == pytest.approx(ref.high, abs=1e-12)

    def test_width_on_bernoulli_stream(self):
        x = np.random.default_rng(0).random(10_000) < 0.05
        lo, hi = mc.wilson_interval(int(x.sum()), x.size)
        assert lo <= 0.05 <= hi
        assert hi - lo <= 0.012

    def test_coverage(self):
        k = np.random.default_rng(1).binomial(10_000, 0.05, size=4000)
        covered = [lo <= 0.05 <= hi for lo, hi in (mc.wilson_interval(int(j), 10_000) for j in k)]
        assert np.mean(covered) >= 0.985

    def test_estimate_inside_interval(self):
        for k in range(0, 31):
            lo, hi = mc.wilson_interval(k, 30)
            assert lo <= k / 30 <= hi


class TestRejectionRate:
    def test_size_rows_predict_alpha(self):
        rows = mc.power_curve(cfg(), xis=[0.0])
        assert {r.test for r in rows} == set(DELTA["tests"])
        for r in rows:
            assert r.asymptotic_prediction == pytest.approx(0.05, abs=1e-15)
            assert r.ci_low <= r.estimate <= r.ci_high
            assert r.R_effective <= r.R

    def test_delta_prediction(self):
        r = mc.estimate_rejection_rate(cfg(n=100_000, replications=20), "optimal_upper", xi=2.0)
        assert r.asymptotic_prediction == pytest.approx(0.312, abs=5e-4)

    def test_expfam_omnibus_prediction_is_alpha(self):
        r = mc.estimate_rejection_rate(cfg(EXPFAM, replications=20), "omnibus_upper", xi=2.0)
        assert r.asymptotic_prediction == 0.05

    def test_deterministic_across_threads(self):
        c = cfg(replications=300)
        one = mc.power_curve(c, xis=[0.0, 1.0], threads=1)
        many = mc.power_curve(c, xis=[0.0, 1.0], threads=7)
        assert one == many

    def test_abstention_accounting(self):
        c = cfg(n=30, replications=500, threshold={"c": -0.05})
        setup = mc.Setup(c, 0.0)
        table = mc.simulate_statistics(c, setup)
        zero = int(np.sum(table[:, 0] == 0))
        assert zero > 0
        for test in ("optimal_upper", "omnibus_upper"):
            r = mc.summarize(setup, test, table)
            assert r.R_effective + zero == r.R

    def test_expfam_optimal_never_abstains(self):
        c = cfg(EXPFAM, n=30, replications=200, threshold={"c": -0.05})
        assert mc.estimate_rejection_rate(c, "optimal_upper").R_effective == 200

    def test_theta_outside_validity_range(self):
        c = cfg(n=100, replications=5)
        with pytest.raises(ParameterError):
            mc.estimate_rejection_rate(c, "optimal_upper", xi=50.0)

    def test_power_curve_marks_failed_cells(self):
        rows = mc.power_curve(cfg(n=100, replications=5), xis=[0.0, 50.0], tests=["optimal_upper"])
        assert rows[0].error is None
        assert rows[1].error and "valid range" in rows[1].error
        assert not rows[1].within_tolerance

    def test_sampler_variants_agree_in_law(self):
        base = dict(n=400, replications=3000, threshold={"c": -0.2}, xi=0.0)
        taus = {}
        for sampler in ("conditional", "direct", "functional"):
            c = cfg(sampler=sampler, grid_size=64, **base)
            taus[sampler] = mc.simulate_statistics(c, mc.Setup(c, 0.0))[:, 0]
        assert stats.ks_2samp(taus["conditional"], taus["direct"]).pvalue > 0.001
        assert stats.ks_2samp(taus["conditional"], taus["functional"]).pvalue > 0.001


class TestKs:
    def test_t_statistic_under_null(self):
        res = mc.ks_uniformity_check(cfg(n=2000, replications=2000, threshold={"c": -0.05}), "T")
        assert res.within_tolerance
        assert res.critical_value == pytest.approx(1.63 / math.sqrt(res.R_effective))

    def test_pooled_values(self):
        res = mc.ks_uniformity_check(cfg(n=2000, replications=200, threshold={"c": -0.05}), "Y")
        assert res.R_effective > 10_000
        assert res.within_tolerance

    def test_single_replication_rejected(self):
        with pytest.raises(InsufficientDataError):
            mc.ks_uniformity_check(cfg(replications=1), "T")

    def test_no_exceedances(self):
        with pytest.raises(InsufficientDataError):
            mc.ks_uniformity_check(cfg(n=0, replications=50, threshold={"c": -0.05}), "T")


class TestLan:
    def test_zero_xi_is_exactly_zero(self):
        res = mc.lan_empirical_check(cfg(replications=50), xi=0.0)
        assert res.mean == 0.0 and res.variance == 0.0
        assert res.within_tolerance

    def test_reports_predictions(self):
        res = mc.lan_empirical_check(cfg(n=100_000, replications=50), xi=1.0)
        assert res.predicted_mean == pytest.approx(-1 / 6)
        assert res.predicted_variance == pytest.approx(1 / 3)

    def test_expfam_predictions(self):
        res = mc.lan_empirical_check(cfg(EXPFAM, n=100_000, replications=50), xi=1.0)
        assert res.predicted_mean == -0.5 and res.predicted_variance == 1.0

    def test_deterministic_across_threads(self):
        c = cfg(n=100_000, replications=200)
        assert mc.lan_empirical_check(c, xi=1.0) == mc.lan_empirical_check(c, threads=5, xi=1.0)
