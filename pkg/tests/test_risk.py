import numpy as np
import pytest

from bayes_regress import (
    Example1Hyper,
    Example2Hyper,
    Example3Hyper,
    ExperimentError,
    UsageError,
    bayes_risk,
    compare_estimators,
    consistency_paths,
)
from bayes_regress.risk import Estimator, resolve_workers
from bayes_regress.seeding import mix, replication_rng, splitmix64


class TestSeeding:
    def test_splitmix_reference_values(self):
        # first outputs of the SplitMix64 generator seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF
        assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4

    def test_mix_depends_on_all_inputs(self):
        base = mix(1, "a", 0)
        assert base == mix(1, "a", 0)
        assert len({base, mix(2, "a", 0), mix(1, "b", 0), mix(1, "a", 1)}) == 4

    def test_rng_streams_reproducible(self):
        a = replication_rng(5, "t", 3).random(4)
        b = replication_rng(5, "t", 3).random(4)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("bad", [-1, 2**64, 1.5, True])
    def test_seed_validation(self, bad):
        with pytest.raises((TypeError, ValueError)):
            mix(bad, "t", 0)


class TestEstimatorIds:
    def test_unknown(self, ex3):
        with pytest.raises(UsageError):
            Estimator("ridge", ex3)

    def test_variant_only_for_closed(self, ex2):
        with pytest.raises(UsageError):
            Estimator("bayes-grid:paper", ex2)
        assert Estimator("bayes-closed:paper", ex2).variant == "paper"
        assert not Estimator("bayes-closed:paper", ex2).is_bayes
        assert Estimator("bayes-closed", ex2).is_bayes


class TestBayesRisk:
    def test_truth_has_zero_risk(self, any_hyper):
        curve = bayes_risk(any_hyper, "truth", [0, 3, 10], 20, [1, 2], seed=1)
        assert all(row.estimate == 0.0 and row.mc_se == 0.0 for row in curve.rows)

    def test_row_layout(self, ex3):
        curve = bayes_risk(ex3, ["bayes-closed", "nadaraya-watson"], [2, 8], 10, [1, 2], seed=4)
        assert len(curve.rows) == 2 * 2 * 2
        row = curve.get(8, 2, "nadaraya-watson")
        assert row.replications == 10 and row.trimmed is False

    def test_jensen_direction(self, ex3):
        curve = bayes_risk(ex3, "bayes-closed", [5, 20], 400, [1, 2], seed=9)
        for n in (5, 20):
            r1, r2 = curve.get(n, 1, "bayes-closed"), curve.get(n, 2, "bayes-closed")
            assert r1.estimate <= np.sqrt(r2.estimate) + r1.mc_se

    def test_example1_trim_flag(self, ex1):
        curve = bayes_risk(ex1, "bayes-closed", [5], 10, 2, seed=2)
        assert curve.rows[0].trimmed is True
        untrimmed = bayes_risk(ex1, "bayes-closed", [5], 10, 2, trim=(0.0, 1.0), seed=2)
        assert untrimmed.rows[0].trimmed is False

    def test_same_draws_across_estimator_sets(self, ex3):
        a = bayes_risk(ex3, "bayes-closed", [4], 30, 2, seed=3)
        b = bayes_risk(ex3, ["nadaraya-watson", "bayes-closed"], [4], 30, 2, seed=3)
        assert a.get(4, 2, "bayes-closed") == b.get(4, 2, "bayes-closed")

    @pytest.mark.parametrize(
        "kwargs",
        [dict(replications=1), dict(loss_k=3), dict(trim=(0.5, 0.5)), dict(n_schedule=[]), dict(n_schedule=[-1])],
    )
    def test_validation(self, ex3, kwargs):
        args = dict(estimator_id="bayes-closed", n_schedule=[5], replications=10, loss_k=2, seed=0)
        args.update(kwargs)
        with pytest.raises(UsageError):
            bayes_risk(ex3, **args)

    def test_nw_needs_data(self, ex3):
        with pytest.raises(UsageError):
            bayes_risk(ex3, "nadaraya-watson", [0, 5], 10, seed=0)

    def test_fallback_limit(self, ex1):
        # a vanishing bandwidth leaves every kernel weight at zero
        from bayes_regress import NWConfig

        with pytest.raises(ExperimentError, match="fallback"):
            bayes_risk(ex1, "nadaraya-watson", [3], 40, seed=0, nw_config=NWConfig(1e-12))

    def test_fallbacks_counted(self, ex2):
        curve = bayes_risk(ex2, "nadaraya-watson", [40], 400, seed=1)
        assert set(curve.fallbacks) == {"nadaraya-watson@40"}
        assert curve.fallbacks["nadaraya-watson@40"] <= 0.05 * 400


class TestCompare:
    def test_self_comparison(self, ex3):
        t = compare_estimators(ex3, ["bayes-closed", "bayes-closed"], 10, 50, 2, seed=3)
        assert all(r.paired_diff == 0.0 and r.paired_se == 0.0 for r in t.rows)
        assert t.violations == ()

    def test_needs_two(self, ex3):
        with pytest.raises(UsageError):
            compare_estimators(ex3, ["bayes-closed"], 10, 50, 2)

    def test_violation_flagged(self, ex3):
        # a non-Bayes reference is never flagged; a Bayes reference against truth is
        t = compare_estimators(ex3, ["bayes-closed", "truth"], 10, 50, 2, seed=1)
        assert t.violations == (("truth", 2),)
        t = compare_estimators(ex3, ["nadaraya-watson", "bayes-closed"], 10, 50, 2, seed=1)
        assert t.violations == ()


class TestConsistencyPaths:
    def test_single_entry_schedule(self, ex2):
        rep = consistency_paths(ex2, "bayes-closed", [7], 5, [0, 1], seed=1)
        assert rep.deviations.shape == (5, 1, 2)
        assert rep.max_deviation.shape == (5, 1)

    def test_schedule_must_increase(self, ex2):
        with pytest.raises(UsageError):
            consistency_paths(ex2, "bayes-closed", [10, 10], 5, [0, 1])

    def test_x1_in_support(self, ex1):
        with pytest.raises(ValueError):
            consistency_paths(ex1, "bayes-closed", [10], 5, [0.0])

    def test_prefix_paths(self, ex3):
        # the value at n is the estimator on the first n draws of one path
        rep = consistency_paths(ex3, "truth", [1, 5], 3, [0.0], seed=8)
        assert np.all(rep.deviations == 0.0)
        rng = replication_rng(8, "paths:example3", 0)
        theta = float(ex3.prior().sample(rng))
        assert theta == rep.thetas[0]

    def test_grid_and_closed_agree(self, ex3):
        a = consistency_paths(ex3, "bayes-closed", [3, 30], 20, [-1.0, 1.0], seed=5)
        b = consistency_paths(ex3, "bayes-grid", [3, 30], 20, [-1.0, 1.0], seed=5)
        np.testing.assert_allclose(a.deviations, b.deviations, atol=2e-3)


class TestDeterminism:
    @pytest.mark.parametrize("workers", [2, 8])
    def test_worker_count_independent(self, ex3, workers):
        one = bayes_risk(ex3, ["bayes-closed", "bayes-grid"], [3, 9], 40, [1, 2], seed=77, workers=1)
        many = bayes_risk(ex3, ["bayes-closed", "bayes-grid"], [3, 9], 40, [1, 2], seed=77, workers=workers)
        assert one == many

    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv("BAYES_REGRESS_THREADS", "3")
        assert resolve_workers(8) == 3
        monkeypatch.delenv("BAYES_REGRESS_THREADS")
        assert resolve_workers(8) == 8
