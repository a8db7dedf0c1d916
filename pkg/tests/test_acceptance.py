"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.  Budgets and tolerances are pinned here; nothing is
deferred to later calibration.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from genbound import (
    MiProfile,
    brute_force_knn,
    chi_squared_neg_cgf,
    discrete_mi,
    full_mi_bound,
    gaussian_mi,
    knn_mi,
    legendre_dual_inverse,
    random_product_joint,
    sub_gaussian_cgf,
    sub_gaussian_ismi,
    KdTree,
    SampleCloud,
)
from genbound import gp_example, logreg, mean_example, sgld
from genbound.bounds import profile_from_discrete_joint
from genbound.cli import main
from genbound.seeding import derive_seeds, substream

MASTER_SEED = 20200616


@contextmanager
def criterion(num, name):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {num} ({name}): FAIL "
              f"[{time.perf_counter() - start:.1f}s]")
        raise
    print(f"\nACCEPTANCE {num} ({name}): PASS "
          f"[{time.perf_counter() - start:.1f}s]")


def test_criterion_1_mean_example():
    with criterion(1, "mean example: Monte Carlo, MI oracle, bound"):
        start = time.perf_counter()
        seeds = derive_seeds(MASTER_SEED, 3)
        for row_seed, n in zip(seeds, (10, 100, 1000)):
            p = mean_example.MeanExampleParams(d=2, sigma_sq=1.0, n=n)
            est, se = mean_example.monte_carlo_gen(p, trials=100_000,
                                                   seed=row_seed)
            assert abs(est - mean_example.exact_gen(p)) <= 3 * se
            assert mean_example.ismi_bound_mean(p) >= mean_example.exact_gen(p)
        for d in (1, 2, 5):
            for n in (2, 3, 10, 100, 1000):
                p = mean_example.MeanExampleParams(d=d, sigma_sq=1.0, n=n)
                oracle = gaussian_mi(mean_example.covariance_blocks(p))
                assert abs(mean_example.exact_per_sample_mi(p) - oracle) <= 1e-12
        p = mean_example.MeanExampleParams(d=2, sigma_sq=1.0, n=10_000)
        scaled = mean_example.ismi_bound_mean(p) * math.sqrt(p.n)
        assert abs(scaled - math.sqrt(2.0) * 2.0) / (math.sqrt(2.0) * 2.0) <= 0.01
        assert time.perf_counter() - start < 60.0


def test_criterion_2_legendre_machinery():
    with criterion(2, "inverse dual: closed forms, monotone, concave"):
        grid = np.logspace(-4, 2, 30)
        bounds = [
            (sub_gaussian_cgf(1.0), lambda y: math.sqrt(2.0 * y)),
            (sub_gaussian_cgf(0.5), lambda y: math.sqrt(0.5 * y)),
            (chi_squared_neg_cgf(1, 1.0), lambda y: 2.0 * math.sqrt(y)),
            (chi_squared_neg_cgf(3, 1.7),
             lambda y: 2.0 * math.sqrt(3.0 * 1.7 ** 2 * y)),
        ]
        for bound, closed in bounds:
            for y in grid:
                numeric = legendre_dual_inverse(bound, y, method="numeric")
                assert abs(numeric - closed(y)) / closed(y) <= 1e-6
            vals = np.array([legendre_dual_inverse(bound, y) for y in grid])
            assert np.all(np.diff(vals) >= -1e-12)
            mids = np.array([legendre_dual_inverse(bound, 0.5 * (a + b))
                             for a, b in zip(grid[:-1], grid[1:])])
            assert np.all(mids >= 0.5 * (vals[:-1] + vals[1:]) - 1e-9)


def test_criterion_3_chain_rule_oracle():
    with criterion(3, "per-sample MI sum vs dataset MI on 1000 joints"):
        start = time.perf_counter()
        rng = substream(MASTER_SEED, 3)
        for _ in range(1000):
            n = int(rng.integers(1, 4))
            joint = random_product_joint(
                rng, int(rng.integers(2, 5)),
                [int(rng.integers(2, 4)) for _ in range(n)])
            profile = profile_from_discrete_joint(joint)
            assert profile.per_sample.sum() <= profile.full_dataset + 1e-9
            lhs = sub_gaussian_ismi(profile, 1.0).gen_upper
            rhs = full_mi_bound(profile.full_dataset, profile.n, 1.0)
            assert lhs <= rhs + 1e-9
        assert time.perf_counter() - start < 30.0


GP_GRID = (2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)


def test_criterion_4_gp_example():
    with criterion(4, "circle ERM: truth, bound, reference curve, phases"):
        start = time.perf_counter()
        seeds = derive_seeds(MASTER_SEED, len(GP_GRID))
        for row_seed, n in zip(seeds, GP_GRID):
            est, se = gp_example.monte_carlo_gen(n, trials=100_000,
                                                 seed=row_seed)
            exact = gp_example.exact_gen_erm(n)
            assert abs(est - exact) <= 3 * se
            bound = gp_example.ismi_bound_gp(n)
            assert math.isfinite(bound)
            assert bound >= exact
            assert bound >= est - 3 * se
            assert bound < gp_example.cmi_reference(n)
        for r in (0.0, 0.5, 1.5, 3.0, 6.0):
            for n in (2, 4, 16, 128):
                mass = gp_example.phase_density(r, n).as_density1d().mass()
                assert abs(mass - 1.0) <= 1e-6
        assert gp_example.phase_ks_distance(1.5, 4, trials=100_000,
                                            seed=MASTER_SEED) < 0.02
        assert gp_example.phase_ks_distance(0.7, 16, trials=100_000,
                                            seed=MASTER_SEED + 1) < 0.02
        assert time.perf_counter() - start < 300.0


def test_criterion_5_gp_noisy():
    with criterion(5, "noisy circle ERM: scaled truth, data processing"):
        eps = 0.05
        seeds = derive_seeds(MASTER_SEED + 5, len(GP_GRID))
        for row_seed, n in zip(seeds, GP_GRID):
            est, se = gp_example.monte_carlo_gen(n, trials=100_000,
                                                 seed=row_seed, epsilon=eps)
            assert abs(est - gp_example.exact_gen_noisy(n, eps)) <= 3 * se
        for n in (4, 32):
            base = gp_example.ismi_gp(n)
            for e in (0.0, 0.05, 0.5, 1.0):
                assert gp_example.ismi_gp(n, epsilon=e) <= base + 1e-8


def test_criterion_6_knn_mi_estimator():
    with criterion(6, "kNN MI: Gaussian closed form, kd-tree vs brute force"):
        for rho in (0.0, 0.5, 0.9):
            truth = -0.5 * math.log(1.0 - rho * rho) if rho else 0.0
            errs = []
            for s in range(10):
                rng = substream(MASTER_SEED, 6, s)
                x = rng.standard_normal(5000)
                y = rho * x + math.sqrt(1.0 - rho * rho) * \
                    rng.standard_normal(5000)
                errs.append(knn_mi(SampleCloud(w=x, z=y, k=5)) - truth)
            assert float(np.mean(np.abs(errs))) <= 0.05
        rng = substream(MASTER_SEED, 66)
        for _ in range(200):
            n = int(rng.integers(10, 257))
            dim = int(rng.integers(1, 7))
            pts = rng.standard_normal((n, dim))
            q = rng.standard_normal(dim)
            k = int(rng.integers(1, min(9, n + 1)))
            d1, i1 = KdTree(pts).query(q, k)
            d2, i2 = brute_force_knn(pts, q, k)
            assert np.array_equal(i1, i2) and np.array_equal(d1, d2)


def test_criterion_7_sgld_bounds():
    with criterion(7, "SGLD: bound ordering, path Monte Carlo, spot value"):
        start = time.perf_counter()
        ratios = {}
        for n in (100, 1000, 10_000):
            for K in (2, 10, 50):
                analytic = sgld.analytic_ismi_bound(n, K, 1.0, 1.0, 1.0)
                baseline = sgld.pensia_bound(n, K, 1.0, 1.0, 1.0)
                assert analytic <= baseline
                ratios[(n, K)] = baseline / analytic
        for K in (2, 10, 50):
            assert ratios[(10_000, K)] > ratios[(100, K)]
        mc, se = sgld.monte_carlo_path_bound(100, 10, 1.0, 1.0, 1.0,
                                             paths=10_000,
                                             seed=MASTER_SEED + 7)
        assert mc <= sgld.analytic_ismi_bound(100, 10, 1.0, 1.0, 1.0) + 3 * se
        assert abs(sgld.pensia_bound(100, 10, 1.0, 1.0, 1.0) - 0.28121) <= 1e-5
        assert time.perf_counter() - start < 60.0


LOGREG_GRID = (25, 50, 100, 200, 400)
# one estimator standard deviation at N=5000, mapped through sqrt(I/2)
BOUND_NOISE_ALLOWANCE = 0.01


def test_criterion_8_logreg_experiment():
    with criterion(8, "logistic regression: estimated bound vs gen error"):
        start = time.perf_counter()
        model = logreg.paper_model()
        seeds = derive_seeds(MASTER_SEED, len(LOGREG_GRID))
        gens, ses, bounds = [], [], []
        for row_seed, n in zip(seeds, LOGREG_GRID):
            gen, se = logreg.empirical_gen_error(
                model, n, trials=1000, test_size=10_000, seed=row_seed)
            bound, _ = logreg.estimate_ismi_bound(
                model, n, runs=5000, k=5, seed=row_seed)
            gens.append(gen)
            ses.append(se)
            bounds.append(bound)
            assert bound >= gen - 0.05  # (b)
        for i in range(len(LOGREG_GRID) - 1):  # (a)
            se_diff = math.hypot(ses[i], ses[i + 1])
            assert gens[i + 1] <= gens[i] + se_diff
            assert bounds[i + 1] <= bounds[i] + BOUND_NOISE_ALLOWANCE
        control = logreg.independence_control_bound(
            model, 25, runs=5000, k=5, seed=MASTER_SEED + 8)
        assert control <= 0.05  # (c)
        assert time.perf_counter() - start < 1800.0


REPRO_COMMANDS = [
    ("mean.csv", ["mean", "--n-grid", "10,50", "--trials", "2000",
                  "--seed", "3"]),
    ("gp.csv", ["gp", "--n-grid", "4", "--trials", "1000", "--seed", "3"]),
    ("gp_noisy.csv", ["gp-noisy", "--n-grid", "4", "--epsilon", "0.05",
                      "--trials", "1000", "--seed", "3"]),
    ("sgld.csv", ["sgld", "--n-grid", "50", "--epochs", "4", "--trials",
                  "1000", "--seed", "3"]),
    ("logreg.csv", ["logreg", "--n-grid", "25", "--N", "1000", "--trials",
                    "100", "--seed", "3"]),
]


def test_criterion_9_reproducibility(tmp_path):
    with criterion(9, "byte-identical CSVs across reruns and thread counts"):
        for csv_name, argv in REPRO_COMMANDS:
            outputs = []
            for run_id, threads in enumerate(("1", "4", "1")):
                out = tmp_path / csv_name.replace(".csv", "") / str(run_id)
                out.mkdir(parents=True)
                code = main([*argv, "--threads", threads,
                             "--out-dir", str(out)])
                assert code == 0
                outputs.append((out / csv_name).read_bytes())
            assert outputs[0] == outputs[1] == outputs[2]
