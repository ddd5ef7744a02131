import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayes_regress import (
    Dataset,
    DomainError,
    Example1Hyper,
    Example2Hyper,
    Example3Hyper,
    UsageError,
    closed_form_regression,
    empty_stats,
    stats_from_data,
    update_stats,
)
from bayes_regress.conjugate import Example1Stats, Example2Stats, Example3Stats, ex3_a_n, ex3_m_1, ex3_rho_1, ex3_s1

import oracles


def fold(hyper, data):
    s = empty_stats(hyper)
    for pair in data:
        s = update_stats(hyper, s, pair)
    return s


class TestUpdateStats:
    def test_example1_single(self, ex1):
        s = update_stats(ex1, Example1Stats(), (2, 3))
        assert (s.n, s.s) == (1, 8.0)

    def test_example2_single(self, ex2):
        s = update_stats(ex2, empty_stats(ex2), (0, 1))
        assert (s.n00, s.n01, s.n10, s.n11, s.n) == (0, 1, 0, 0, 1)

    def test_example3_single(self, ex3):
        s = update_stats(ex3, Example3Stats(2, 5.0), (1.5, -0.5))
        assert (s.n, s.s1) == (3, 6.0)

    def test_variant_mismatch(self, ex1):
        with pytest.raises(UsageError):
            update_stats(ex1, Example2Stats(), (1, 1))

    def test_example2_non_binary(self, ex2):
        with pytest.raises(DomainError):
            update_stats(ex2, Example2Stats(), (0.5, 1))

    def test_example1_out_of_support(self, ex1):
        with pytest.raises(DomainError):
            update_stats(ex1, Example1Stats(), (-1, 1))


class TestStreamingBatch:
    @pytest.mark.parametrize("n", [0, 1, 17, 10_000])
    def test_equivalence(self, any_hyper, n, rng):
        m = any_hyper.model()
        theta = float(any_hyper.prior().sample(rng))
        data = m.sample_pairs(theta, n, rng)
        a, b = fold(any_hyper, data), stats_from_data(any_hyper, data)
        assert a.n == b.n == n
        if any_hyper.name == "example2":
            assert a == b
            assert a.n00 + a.n01 + a.n10 + a.n11 == n
        else:
            attr = "s" if any_hyper.name == "example1" else "s1"
            assert getattr(a, attr) == pytest.approx(getattr(b, attr), rel=1e-12, abs=1e-300)

    @given(st.lists(st.tuples(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3)), max_size=60))
    @settings(max_examples=100, deadline=None)
    def test_example1_property(self, pairs):
        h = Example1Hyper(1.0)
        d = Dataset.from_pairs(pairs)
        a, b = fold(h, d), stats_from_data(h, d)
        assert a.s >= 0
        assert a.s == pytest.approx(b.s, rel=1e-12, abs=0)
        assert a.s == pytest.approx(math.fsum(x * (1 + y) for x, y in pairs), rel=1e-12, abs=0)


class TestExample1:
    def test_empty_sample(self, ex1):
        assert closed_form_regression(ex1, empty_stats(ex1), 2.0) == 1.5

    def test_one_pair(self, ex1):
        s = stats_from_data(ex1, Dataset.from_pairs([(2, 3)]))
        assert closed_form_regression(ex1, s, 1.0) == pytest.approx(10 / 3, rel=1e-15)
        assert closed_form_regression(ex1, s, 1.0) == pytest.approx(oracles.ex1_oracle(1.0, [(2, 3)], 1.0), rel=1e-9)

    def test_pole(self, ex1):
        with pytest.raises(DomainError):
            closed_form_regression(ex1, empty_stats(ex1), 0.0)

    def test_consistency_smoke(self, ex1, rng):
        theta = 1.7
        d = ex1.model().sample_pairs(theta, 200_000, rng)
        s = stats_from_data(ex1, d)
        assert s.s / s.n == pytest.approx(2 / theta, rel=0.02)
        for x in (0.5, 1.0, 2.0):
            assert closed_form_regression(ex1, s, x) == pytest.approx(1 / (theta * x), rel=0.02)


class TestExample2:
    def test_empty_sample_variants(self, ex2):
        s = empty_stats(ex2)
        assert closed_form_regression(ex2, s, 1) == pytest.approx(2 / 3, abs=1e-15)
        assert closed_form_regression(ex2, s, 0) == pytest.approx(2 / 3, abs=1e-15)
        assert closed_form_regression(ex2, s, 1, "paper") == 0.25
        assert closed_form_regression(ex2, s, 0, "paper") == pytest.approx(1 / 3, abs=1e-15)

    @pytest.mark.parametrize(
        "pairs", [[(1, 1)], [(0, 0), (0, 1)], [(1, 0), (1, 1), (0, 1), (0, 0), (1, 1)], [(0, 1)] * 7]
    )
    def test_matches_exact_integration(self, ex2, pairs):
        s = stats_from_data(ex2, Dataset.from_pairs(pairs))
        for k1 in (0, 1):
            exact = oracles.ex2_exact(pairs, k1)
            assert closed_form_regression(ex2, s, k1) == pytest.approx(float(exact), abs=1e-15)

    def test_alternative_variant_formula(self, ex2):
        s = Example2Stats(n00=2, n01=3, n10=1, n11=4)
        n, np0, n01 = 10, 3, 3
        assert closed_form_regression(ex2, s, 0, "paper") == (np0 + 2 * n01 + 1) / (2 * n + np0 + 2 * n01 + 3)
        assert closed_form_regression(ex2, s, 1, "paper") == (np0 + 2 * n01 + 1) / (2 * n + np0 + 2 * n01 + 4)

    def test_bad_predictor(self, ex2):
        with pytest.raises(DomainError):
            closed_form_regression(ex2, empty_stats(ex2), 0.5)

    def test_bad_variant(self, ex2):
        with pytest.raises(UsageError):
            closed_form_regression(ex2, empty_stats(ex2), 1, "nonsense")


class TestExample3Helpers:
    """Alternative-variant helpers, evaluated by hand."""

    def test_a_n(self):
        assert ex3_a_n(0, 0.5, 1.0, 1.0) == 4.0
        assert ex3_a_n(3, 0.2, 2.0, 0.5) == 2 * 4 * 1.2 + 16.0

    def test_rho_1(self):
        assert ex3_rho_1(4.0, 0.5) == pytest.approx(-13 / 22, rel=1e-15)

    def test_m_1(self):
        # (s1 + (1+rho) sigma^2/tau^2 mu) / (2 (1-rho1)(1+rho)^2 sigma^2 a_n)
        got = ex3_m_1(3.0, -0.5, 4.0, 1.0, 0.5, 1.0, 1.0)
        assert got == pytest.approx((3 + 1.5) / (2 * 1.5 * 2.25 * 4), rel=1e-15)

    def test_s1(self):
        assert ex3_s1(Dataset.from_pairs([(1, 2), (-0.5, 0.25)])) == 2.75

    def test_alternative_variant_uses_helpers(self, ex3):
        s = empty_stats(ex3)
        r1 = -13 / 22
        assert closed_form_regression(ex3, s, 1.0, "paper") == pytest.approx(r1, rel=1e-15)
        assert closed_form_regression(ex3, s, 0.0, "paper") == 0.0


class TestExample3:
    def test_empty_sample_is_joint_normal_conditional(self, ex3):
        # n = 0: Cov(X1, X2) = tau^2 + rho sigma^2, Var(X1) = tau^2 + sigma^2
        s = empty_stats(ex3)
        assert closed_form_regression(ex3, s, 1.0) == pytest.approx(0.75, rel=1e-15)
        assert closed_form_regression(ex3, s, 0.0) == 0.0

    @pytest.mark.parametrize(
        "hyper",
        [Example3Hyper(), Example3Hyper(1.0, 2.0, 0.7, -0.3), Example3Hyper(-2.0, 0.5, 1.5, 0.9)],
        ids=["default", "neg-rho", "strong-rho"],
    )
    def test_matches_quadrature_oracle(self, hyper, rng):
        for n in (0, 1, 5):
            theta = float(hyper.prior().sample(rng))
            d = hyper.model().sample_pairs(theta, n, rng)
            s = stats_from_data(hyper, d)
            for x in (-1.0, 0.5, 2.0):
                want = oracles.ex3_oracle(hyper.mu, hyper.tau, hyper.sigma, hyper.rho, list(d), x)
                assert closed_form_regression(hyper, s, x) == pytest.approx(want, rel=1e-8, abs=1e-10)

    def test_alternative_variant_disagrees(self, ex3):
        s = empty_stats(ex3)
        assert abs(closed_form_regression(ex3, s, 1.0, "paper") - closed_form_regression(ex3, s, 1.0)) > 1.0

    def test_affine_in_x1(self, ex3, rng):
        d = ex3.model().sample_pairs(0.3, 12, rng)
        s = stats_from_data(ex3, d)
        v = [closed_form_regression(ex3, s, x) for x in (0.0, 1.0, 2.0)]
        assert v[2] - v[1] == pytest.approx(v[1] - v[0], rel=1e-12)


class TestHyperValidation:
    @pytest.mark.parametrize(
        "make", [lambda: Example1Hyper(0.0), lambda: Example3Hyper(tau=-1), lambda: Example3Hyper(sigma=0),
                 lambda: Example3Hyper(rho=1.0), lambda: Example3Hyper(mu=math.nan)]
    )
    def test_rejects(self, make):
        with pytest.raises(DomainError):
            make()
