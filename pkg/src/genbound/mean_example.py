"""Gaussian mean estimation: the worked example with every quantity in
closed form.

Data Z ~ N(mu, sigma^2 I_d), squared-error loss, ERM = sample mean.  The
exact generalization gap is 2 sigma^2 d / n, each per-sample MI is
(d/2) log(n/(n-1)), and the loss under independent (W, Z) is a scaled
chi-squared variable whose negative-branch CGF bound yields the analytic
per-sample-MI bound.  Monte Carlo validates the exact gap.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import MiProfile, ismi_bound
from .cgf import chi_squared_neg_cgf
from .errors import DomainError
from .mi_exact import GaussianJointSpec
from .seeding import chunk_sizes, map_chunks, substream

_MC_CHUNK_SCALARS = 2**24  # target floats per Monte Carlo chunk


@dataclass(frozen=True)
class MeanExampleParams:
    """Dimension d, per-coordinate variance sigma_sq, sample count n.

    The mean vector only shifts the data and cancels from every output; it
    defaults to 0.
    """

    d: int
    sigma_sq: float
    n: int
    mu: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.d < 1 or int(self.d) != self.d:
            raise DomainError(f"dimension must be a positive integer, got {self.d}")
        if not (self.sigma_sq > 0):
            raise DomainError(f"variance must be positive, got {self.sigma_sq}")
        if self.n < 2:
            raise DomainError(f"need n >= 2 for the MI formula, got {self.n}")
        mu = np.zeros(self.d) if self.mu is None else np.asarray(self.mu, float)
        if mu.shape != (self.d,):
            raise DomainError("mean vector has wrong shape")
        object.__setattr__(self, "mu", mu)

    @property
    def sigma_l_sq(self):
        """Variance scale of the decoupled loss: (n+1) sigma^2 / n."""
        return (self.n + 1) * self.sigma_sq / self.n


def exact_gen(params):
    """Exact generalization error 2 sigma^2 d / n."""
    return 2.0 * params.sigma_sq * params.d / params.n


def exact_per_sample_mi(params):
    """I(W; Z_i) = (d/2) log(n / (n-1)) nats, identical for every i."""
    return 0.5 * params.d * math.log(params.n / (params.n - 1.0))


def covariance_blocks(params):
    """The joint covariance of (W, Z_i): blocks Sigma/n, Sigma/n, Sigma."""
    sigma = params.sigma_sq * np.eye(params.d)
    return GaussianJointSpec(cov_a=sigma / params.n, cov_b=sigma,
                             cross=sigma / params.n)


def ismi_bound_mean(params):
    """Closed form sigma^2 d sqrt(2 (n+1)^2/n^2 log(n/(n-1)))."""
    n = params.n
    return params.sigma_sq * params.d * math.sqrt(
        2.0 * (n + 1.0) ** 2 / n ** 2 * math.log(n / (n - 1.0)))


def ismi_bound_mean_composed(params):
    """Same bound assembled through the generic machinery (consistency check)."""
    psi_minus = chi_squared_neg_cgf(params.d, params.sigma_l_sq)
    profile = MiProfile(np.full(params.n, exact_per_sample_mi(params)))
    return ismi_bound(profile, psi_plus=None, psi_minus=psi_minus).gen_upper


def monte_carlo_gen(params, trials, seed, threads=1):
    """Monte Carlo estimate of the generalization gap: (estimate, std_error).

    Per trial: draw n samples, W = sample mean; the population risk uses the
    exact identity E||W - Z~||^2 = sigma^2 d + ||W - mu||^2, the empirical
    risk is evaluated on the training sample.  Chunked with per-chunk seed
    substreams, so results are bit-identical for any thread count.
    """
    if trials < 100:
        raise DomainError(f"need at least 100 trials, got {trials}")
    d, n = params.d, params.n
    sigma = math.sqrt(params.sigma_sq)
    chunk = max(1, _MC_CHUNK_SCALARS // (n * d))
    sizes = chunk_sizes(trials, chunk)

    def run_chunk(ci):
        rng = substream(seed, ci)
        z = params.mu + sigma * rng.standard_normal((sizes[ci], n, d))
        w = z.mean(axis=1)
        pop = params.sigma_sq * d + ((w - params.mu) ** 2).sum(axis=1)
        emp = ((z - w[:, None, :]) ** 2).sum(axis=2).mean(axis=1)
        gap = pop - emp
        return gap.sum(), (gap * gap).sum()

    parts = map_chunks(run_chunk, len(sizes), threads)
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / trials
    var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
    return mean, math.sqrt(var / trials)


def experiment_row(n, d, sigma_sq, trials, seed, threads=1):
    """One CSV row of the mean-estimation experiment at sample count n."""
    params = MeanExampleParams(d=d, sigma_sq=sigma_sq, n=n)
    gen_mc, gen_mc_se = monte_carlo_gen(params, trials, seed, threads)
    return {
        "n": n,
        "d": d,
        "sigma_sq": sigma_sq,
        "gen_exact": exact_gen(params),
        "gen_mc": gen_mc,
        "gen_mc_se": gen_mc_se,
        "mi_per_sample": exact_per_sample_mi(params),
        "ismi_bound": ismi_bound_mean(params),
        "full_mi_bound": math.inf,  # ERM is deterministic given S
    }
