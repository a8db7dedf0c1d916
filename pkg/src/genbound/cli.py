"""Command-line entry point: each subcommand reproduces one experiment as a
CSV plus manifest, prints a one-line summary per grid row, and validates
its own sanity conditions (exit 0 on success, 2 on validation failure,
1 on usage errors)."""

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import gp_example, logreg, mean_example, sgld
from .cgf import chi_squared_neg_cgf, legendre_dual_inverse, sub_gaussian_cgf
from .kdtree import brute_force_knn, knn_search
from .manifest import RunManifest, StopWatch, write_csv
from .mi_exact import chain_rule_gap, random_product_joint
from .seeding import derive_seeds, substream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2

DEFAULT_OUT_DIR_ENV = "GENBOUND_OUT_DIR"

MEAN_SCHEMA = {
    "n": "training sample count",
    "d": "data dimension",
    "sigma_sq": "per-coordinate data variance",
    "gen_exact": "exact generalization error 2*sigma^2*d/n",
    "gen_mc": "Monte Carlo generalization error",
    "gen_mc_se": "standard error of gen_mc",
    "mi_per_sample": "exact per-sample MI (d/2)log(n/(n-1)) [nats]",
    "ismi_bound": "analytic per-sample-MI bound",
    "full_mi_bound": "full-dataset-MI bound (inf: deterministic ERM)",
}
GP_SCHEMA = {
    "n": "training sample count",
    "epsilon": "atom mass of the phase noise at 0 (1.0 = noiseless ERM)",
    "gen_exact": "exact generalization error",
    "gen_mc": "Monte Carlo generalization error",
    "gen_mc_se": "standard error of gen_mc",
    "mi_per_sample": "per-sample MI from quadrature [nats]",
    "ismi_bound": "bound sqrt(2 * mi_per_sample)",
    "cmi_reference": "chained-bound reference 19.0352/sqrt(n)",
}
SGLD_SCHEMA = {
    "n": "training sample count",
    "K": "epochs",
    "c": "step-size constant (eta_t = c/t)",
    "L": "gradient norm clip",
    "R": "sub-Gaussian parameter of the loss",
    "ismi_analytic": "closed-form per-sample-path bound",
    "ismi_mc_mean": "Monte Carlo mean of the per-path bound",
    "ismi_mc_se": "standard error of ismi_mc_mean",
    "pensia": "full-dataset baseline bound",
    "ratio": "pensia / ismi_analytic",
}
LOGREG_SCHEMA = {
    "n": "training sample count",
    "N": "independent training runs feeding the MI estimate",
    "k": "nearest-neighbor count of the MI estimator",
    "gen_emp": "empirical generalization error (held-out minus training)",
    "gen_emp_se": "standard error of gen_emp",
    "mi_hat": "kNN estimate of I(W;Z_1) [nats]",
    "ismi_bound_hat": "estimated bound sqrt(max(mi_hat,0)/2)",
    "resampled_trials": "separable draws replaced during training",
    "estimator_variant": "kNN MI estimator variant",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _int_grid(text):
    try:
        values = [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer grid: {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"grid values must be >= 1: {text!r}")
    return values


def _out_dir(args):
    out = args.out_dir or os.environ.get(DEFAULT_OUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _finish(args, name, rows, columns, schema, params, watch, failures):
    out_dir = _out_dir(args)
    csv_path = write_csv(out_dir / f"{name}.csv", columns, rows)
    manifest = RunManifest(
        experiment=name, parameters=params, seed=args.seed,
        wall_clock_s=watch.elapsed, outputs=[str(csv_path)], schema=schema)
    manifest.write(out_dir / f"{name}.manifest.json")
    for msg in failures:
        print(f"VALIDATION FAIL: {msg}")
    if failures:
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_mean(args):
    seeds = derive_seeds(args.seed, len(args.n_grid))
    rows, failures = [], []
    with StopWatch() as watch:
        for row_seed, n in zip(seeds, args.n_grid):
            row = mean_example.experiment_row(
                n=n, d=args.d, sigma_sq=args.sigma_sq, trials=args.trials,
                seed=row_seed, threads=args.threads)
            rows.append(row)
            if abs(row["gen_mc"] - row["gen_exact"]) > 3 * row["gen_mc_se"]:
                failures.append(f"n={n}: Monte Carlo off by > 3 SE")
            if row["ismi_bound"] < row["gen_exact"]:
                failures.append(f"n={n}: bound below the exact error")
            print(f"mean n={n}: gen={row['gen_exact']:.6g} "
                  f"mc={row['gen_mc']:.6g}(se {row['gen_mc_se']:.2g}) "
                  f"ismi={row['ismi_bound']:.6g} full-mi=inf")
    params = {"n_grid": args.n_grid, "d": args.d, "sigma_sq": args.sigma_sq,
              "trials": args.trials, "threads": args.threads}
    return _finish(args, "mean", rows, list(MEAN_SCHEMA), MEAN_SCHEMA,
                   params, watch, failures)


def _run_gp(args, epsilon, name):
    seeds = derive_seeds(args.seed, len(args.n_grid))
    rows, failures = [], []
    with StopWatch() as watch:
        for row_seed, n in zip(seeds, args.n_grid):
            row = gp_example.experiment_row(n=n, trials=args.trials,
                                            seed=row_seed, epsilon=epsilon,
                                            threads=args.threads)
            rows.append(row)
            if abs(row["gen_mc"] - row["gen_exact"]) > 3 * row["gen_mc_se"]:
                failures.append(f"n={n}: Monte Carlo off by > 3 SE")
            if row["ismi_bound"] < row["gen_exact"] and n >= 2:
                failures.append(f"n={n}: bound below the exact error")
            if epsilon is None and n >= 2 \
                    and row["ismi_bound"] >= row["cmi_reference"]:
                failures.append(f"n={n}: bound does not beat the reference curve")
            print(f"{name} n={n}: gen={row['gen_exact']:.6g} "
                  f"mc={row['gen_mc']:.6g}(se {row['gen_mc_se']:.2g}) "
                  f"ismi={row['ismi_bound']:.6g} cmi={row['cmi_reference']:.6g}")
    params = {"n_grid": args.n_grid, "trials": args.trials,
              "epsilon": epsilon, "threads": args.threads}
    return _finish(args, name, rows, list(GP_SCHEMA), GP_SCHEMA,
                   params, watch, failures)


def cmd_gp(args):
    return _run_gp(args, None, "gp")


def cmd_gp_noisy(args):
    return _run_gp(args, args.epsilon, "gp_noisy")


def cmd_sgld(args):
    grid = [(n, K) for n in args.n_grid for K in args.epochs]
    seeds = derive_seeds(args.seed, len(grid))
    rows, failures = [], []
    with StopWatch() as watch:
        for row_seed, (n, K) in zip(seeds, grid):
            analytic = sgld.analytic_ismi_bound(n, K, args.c, args.L, args.R)
            pensia = sgld.pensia_bound(n, K, args.c, args.L, args.R)
            mc_mean, mc_se = sgld.monte_carlo_path_bound(
                n, K, args.c, args.L, args.R, paths=args.trials,
                seed=row_seed, threads=args.threads)
            rows.append({
                "n": n, "K": K, "c": args.c, "L": args.L, "R": args.R,
                "ismi_analytic": analytic, "ismi_mc_mean": mc_mean,
                "ismi_mc_se": mc_se, "pensia": pensia,
                "ratio": pensia / analytic,
            })
            if analytic > pensia:
                failures.append(f"n={n} K={K}: per-sample bound above baseline")
            if mc_mean > analytic + 3 * mc_se:
                failures.append(f"n={n} K={K}: path mean above the analytic bound")
            print(f"sgld n={n} K={K}: ismi={analytic:.6g} "
                  f"mc={mc_mean:.6g}(se {mc_se:.2g}) pensia={pensia:.6g} "
                  f"ratio={pensia / analytic:.3f}")
    params = {"n_grid": args.n_grid, "epochs": args.epochs, "c": args.c,
              "L": args.L, "R": args.R, "trials": args.trials,
              "threads": args.threads}
    return _finish(args, "sgld", rows, list(SGLD_SCHEMA), SGLD_SCHEMA,
                   params, watch, failures)


def cmd_logreg(args):
    model = logreg.paper_model()
    seeds = derive_seeds(args.seed, len(args.n_grid))
    rows, failures = [], []
    with StopWatch() as watch:
        for row_seed, n in zip(seeds, args.n_grid):
            row = logreg.experiment_row(
                model, n=n, runs=args.N, k=args.k, trials=args.trials,
                test_size=args.test_size, seed=row_seed, threads=args.threads)
            rows.append(row)
            if row["ismi_bound_hat"] < row["gen_emp"] - 0.05:
                failures.append(f"n={n}: estimated bound below the "
                                "empirical error beyond tolerance")
            print(f"logreg n={n}: gen={row['gen_emp']:.5f}"
                  f"(se {row['gen_emp_se']:.2g}) mi={row['mi_hat']:.5f} "
                  f"bound={row['ismi_bound_hat']:.5f} "
                  f"resampled={row['resampled_trials']}")
    params = {"n_grid": args.n_grid, "N": args.N, "k": args.k,
              "trials": args.trials, "test_size": args.test_size,
              "threads": args.threads}
    return _finish(args, "logreg", rows, list(LOGREG_SCHEMA), LOGREG_SCHEMA,
                   params, watch, failures)


def cmd_selftest(args):
    """Property suites over the exact-MI oracles and the dual-inverse
    machinery; prints one line per suite."""
    failures = []
    rng = substream(args.seed, 0)

    from .bounds import profile_from_discrete_joint

    worst_chain, worst_concave = 0.0, 0.0
    for _ in range(args.trials):
        n = int(rng.integers(1, 4))
        w_size = int(rng.integers(2, 5))
        z_sizes = [int(rng.integers(2, 4)) for _ in range(n)]
        joint = random_product_joint(rng, w_size, z_sizes)
        i_ws, i_sum = chain_rule_gap(joint)
        worst_chain = max(worst_chain, i_sum - i_ws)
        prof = profile_from_discrete_joint(joint)
        lhs = np.mean(np.sqrt(2.0 * prof.clamped()))
        rhs = math.sqrt(2.0 * prof.full_dataset / prof.n)
        worst_concave = max(worst_concave, lhs - rhs)
    ok = worst_chain <= 1e-9 and worst_concave <= 1e-9
    print(f"selftest chain-rule oracle ({args.trials} joints): "
          f"{'PASS' if ok else 'FAIL'} "
          f"(worst gaps {worst_chain:.2e}, {worst_concave:.2e})")
    if not ok:
        failures.append("chain-rule oracle")

    grid = np.logspace(-4, 2, 30)
    worst_rel = 0.0
    for bound in (sub_gaussian_cgf(1.0), sub_gaussian_cgf(0.5),
                  chi_squared_neg_cgf(2, 1.0), chi_squared_neg_cgf(4, 2.2)):
        for y in grid:
            closed = legendre_dual_inverse(bound, y, method="closed")
            numeric = legendre_dual_inverse(bound, y, method="numeric")
            worst_rel = max(worst_rel, abs(numeric - closed) / closed)
    ok = worst_rel <= 1e-6
    print(f"selftest dual-inverse closed vs numeric: "
          f"{'PASS' if ok else 'FAIL'} (worst rel err {worst_rel:.2e})")
    if not ok:
        failures.append("dual inverse agreement")

    mismatches = 0
    for i in range(50):
        pts = substream(args.seed, 1, i).standard_normal(
            (int(rng.integers(10, 128)), int(rng.integers(1, 5))))
        q = substream(args.seed, 2, i).standard_normal(pts.shape[1])
        k = int(rng.integers(1, min(8, pts.shape[0])))
        d1, i1 = knn_search(pts, q, k, method="kdtree")
        d2, i2 = brute_force_knn(pts, q, k)
        if not (np.array_equal(i1, i2) and np.array_equal(d1, d2)):
            mismatches += 1
    print(f"selftest kd-tree vs brute force: "
          f"{'PASS' if mismatches == 0 else 'FAIL'} ({mismatches} mismatches)")
    if mismatches:
        failures.append("kd-tree agreement")

    for msg in failures:
        print(f"VALIDATION FAIL: {msg}")
    return EXIT_VALIDATION if failures else EXIT_OK


def build_parser():
    parser = _Parser(prog="genbound",
                     description="Generalization-bound experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_default):
        p.add_argument("--seed", type=int, default=20200616)
        p.add_argument("--trials", type=int, default=trials_default)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out-dir", default=None,
                       help=f"output directory (default ${DEFAULT_OUT_DIR_ENV} or .)")

    p = sub.add_parser("mean", help="Gaussian mean-estimation example")
    common(p, 100_000)
    p.add_argument("--n-grid", type=_int_grid, default=[10, 100, 1000])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--sigma-sq", type=float, default=1.0)
    p.set_defaults(fn=cmd_mean)

    p = sub.add_parser("gp", help="unit-circle ERM example")
    common(p, 100_000)
    p.add_argument("--n-grid", type=_int_grid,
                   default=[2, 4, 8, 16, 32, 64, 128, 256, 512, 1024])
    p.set_defaults(fn=cmd_gp)

    p = sub.add_parser("gp-noisy", help="unit-circle noisy-ERM example")
    common(p, 100_000)
    p.add_argument("--n-grid", type=_int_grid,
                   default=[2, 4, 8, 16, 32, 64, 128, 256, 512, 1024])
    p.add_argument("--epsilon", type=float, default=0.05)
    p.set_defaults(fn=cmd_gp_noisy)

    p = sub.add_parser("sgld", help="SGLD bound comparison")
    common(p, 10_000)
    p.add_argument("--n-grid", type=_int_grid, default=[100, 1000, 10000])
    p.add_argument("--epochs", type=_int_grid, default=[2, 10, 50])
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--R", type=float, default=1.0)
    p.set_defaults(fn=cmd_sgld)

    p = sub.add_parser("logreg", help="logistic-regression estimated bound")
    common(p, 500)
    p.add_argument("--n-grid", type=_int_grid, default=[25, 50, 100, 200, 400])
    p.add_argument("--N", type=int, default=5000,
                   help="independent training runs for the MI estimate")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--test-size", type=int, default=10_000)
    p.set_defaults(fn=cmd_logreg)

    p = sub.add_parser("selftest", help="oracle and property suites")
    common(p, 1000)
    p.set_defaults(fn=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"genbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
