"""Tests for the Gaussian mean-estimation example."""

import math

import numpy as np
import pytest

from genbound import DomainError, gaussian_mi
from genbound.mean_example import (
    MeanExampleParams,
    covariance_blocks,
    exact_gen,
    exact_per_sample_mi,
    experiment_row,
    ismi_bound_mean,
    ismi_bound_mean_composed,
    monte_carlo_gen,
)


def params(d=2, sigma_sq=1.0, n=10):
    return MeanExampleParams(d=d, sigma_sq=sigma_sq, n=n)


class TestClosedForms:
    def test_exact_gen_value(self):
        assert exact_gen(params()) == pytest.approx(0.4)

    def test_exact_gen_vanishes_for_large_n(self):
        assert exact_gen(params(n=10**9)) < 1e-8

    def test_mi_values(self):
        assert exact_per_sample_mi(params(n=2)) == pytest.approx(math.log(2.0))
        assert exact_per_sample_mi(params(n=10)) == pytest.approx(
            math.log(10.0 / 9.0))

    def test_mi_matches_covariance_block_oracle(self):
        for d in (1, 2, 5):
            for n in (2, 3, 10, 100):
                for s2 in (0.5, 1.0, 3.0):
                    p = params(d=d, sigma_sq=s2, n=n)
                    assert exact_per_sample_mi(p) == pytest.approx(
                        gaussian_mi(covariance_blocks(p)), abs=1e-12)

    def test_bound_value(self):
        # sigma^2=1, d=2, n=10: 2 sqrt(2 * 1.21 * log(10/9))
        expected = 2.0 * math.sqrt(2.0 * 1.21 * math.log(10.0 / 9.0))
        assert ismi_bound_mean(params()) == pytest.approx(expected)
        assert expected == pytest.approx(1.009895931058126)

    def test_bound_matches_generic_assembly(self):
        for d in (1, 2, 4):
            for n in (2, 10, 1000):
                p = params(d=d, sigma_sq=1.4, n=n)
                assert ismi_bound_mean(p) == pytest.approx(
                    ismi_bound_mean_composed(p), abs=1e-9)

    def test_bound_dominates_truth(self):
        for d in (1, 3):
            for s2 in (0.5, 2.0):
                for n in (2, 10, 100, 10000):
                    p = params(d=d, sigma_sq=s2, n=n)
                    assert ismi_bound_mean(p) >= exact_gen(p)

    def test_bound_ratio_grows_like_sqrt_n(self):
        for n in (100, 1000):
            r1 = ismi_bound_mean(params(n=n)) / exact_gen(params(n=n))
            r2 = ismi_bound_mean(params(n=4 * n)) / exact_gen(params(n=4 * n))
            assert 1.9 <= r2 / r1 <= 2.1

    def test_bound_asymptote(self):
        p = params(n=10**4)
        assert ismi_bound_mean(p) * math.sqrt(p.n) == pytest.approx(
            math.sqrt(2.0) * p.sigma_sq * p.d, rel=0.01)

    def test_rejects_tiny_n(self):
        with pytest.raises(DomainError):
            params(n=1)


class TestMonteCarlo:
    def test_matches_exact_gen_within_three_se(self):
        p = params()
        est, se = monte_carlo_gen(p, trials=20000, seed=8)
        assert abs(est - exact_gen(p)) <= 3 * se

    def test_deterministic_reruns(self):
        p = params()
        a = monte_carlo_gen(p, trials=5000, seed=5)
        b = monte_carlo_gen(p, trials=5000, seed=5)
        assert a == b

    def test_thread_count_does_not_change_results(self):
        p = params(n=50)
        a = monte_carlo_gen(p, trials=20000, seed=5, threads=1)
        b = monte_carlo_gen(p, trials=20000, seed=5, threads=4)
        assert a == b

    def test_rejects_too_few_trials(self):
        with pytest.raises(DomainError):
            monte_carlo_gen(params(), trials=10, seed=0)


class TestExperimentRow:
    def test_row_fields_and_sentinel(self):
        row = experiment_row(n=10, d=2, sigma_sq=1.0, trials=500, seed=3)
        assert math.isinf(row["full_mi_bound"])
        assert row["ismi_bound"] >= row["gen_exact"]
        assert row["mi_per_sample"] == pytest.approx(math.log(10.0 / 9.0))
