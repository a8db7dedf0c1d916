"""Stochastic gradient Langevin dynamics: path sampling, per-sample
information budgets, and the closed-form bound chain.

The per-path bound charges each training sample only for the iterations
that touched it:

    (R/n) * sum_i sqrt( sum_{tau in T_i} eta_tau^2 L^2 / sigma_tau^2 ),

where T_i collects the iterations using sample i.  With the inverse-time
schedule eta_t = c/t, sigma_t = sqrt(eta_t) and without-replacement
sampling, bounding each epoch's position by its epoch floor gives the
analytic form (R L sqrt(c) / n) * sum_i sqrt(1/i + (log(K-1)+1)/n), which
every realized path obeys, and which beats the full-dataset baseline
(R L / sqrt(n)) * sqrt(c log(nK) + c) by a growing sqrt(log n) factor.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .seeding import chunk_sizes, map_chunks, substream

WITHOUT_REPLACEMENT = "without-replacement"
WITH_REPLACEMENT = "with-replacement"

_PATH_CHUNK = 512


@dataclass(frozen=True)
class SgldSchedule:
    """Step sizes eta_t and noise scales sigma_t for t = 1..T."""

    etas: np.ndarray
    sigmas: np.ndarray

    def __post_init__(self):
        etas = np.asarray(self.etas, dtype=float)
        sigmas = np.asarray(self.sigmas, dtype=float)
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "sigmas", sigmas)
        if etas.shape != sigmas.shape or etas.ndim != 1 or etas.size == 0:
            raise DomainError("schedule needs matching 1-D eta and sigma arrays")
        if np.any(etas < 0) or np.any(sigmas <= 0):
            raise DomainError("need eta_t >= 0 and sigma_t > 0")

    @classmethod
    def inverse_time(cls, c, T):
        """eta_t = c/t with sigma_t = sqrt(eta_t) (inverse temperature 2)."""
        if not (c > 0) or T < 1:
            raise DomainError("need c > 0 and T >= 1")
        t = np.arange(1, T + 1, dtype=float)
        etas = c / t
        return cls(etas=etas, sigmas=np.sqrt(etas))

    @property
    def T(self):
        return self.etas.size

    def info_rates(self, L):
        """Per-iteration ratios eta_t^2 L^2 / sigma_t^2."""
        return (self.etas * L) ** 2 / self.sigmas ** 2


@dataclass(frozen=True)
class SgldPath:
    """A realized index sequence u_1..u_T with values in {0, .., n-1}."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        if idx.ndim != 1 or idx.size == 0:
            raise DomainError("path must be a nonempty 1-D index sequence")
        if idx.min() < 0 or idx.max() >= self.n:
            raise DomainError("path indices out of range")

    @property
    def T(self):
        return self.indices.size

    def iteration_sets(self):
        """T_i for each sample: the (ost 1-based) iterations that used it."""
        sets = [[] for _ in range(self.n)]
        for t, u in enumerate(self.indices, start=1):
            sets[u].append(t)
        return [np.array(s, dtype=np.int64) for s in sets]


@dataclass(frozen=True)
class SgldRunConfig:
    """Dataset size n, epochs K, schedule constant c, gradient clip L,
    sub-Gaussian R, dimension d, and the index sampling scheme."""

    n: int
    K: int
    c: float
    L: float
    R: float
    d: int
    scheme: str = WITHOUT_REPLACEMENT

    def __post_init__(self):
        if self.n < 1 or self.K < 1 or self.d < 1:
            raise DomainError("n, K, d must be positive")
        if not (self.c > 0 and self.L > 0 and self.R > 0):
            raise DomainError("c, L, R must be positive")
        if self.scheme not in (WITHOUT_REPLACEMENT, WITH_REPLACEMENT):
            raise DomainError(f"unknown sampling scheme {self.scheme!r}")

    @property
    def T(self):
        return self.n * self.K

    def schedule(self):
        return SgldSchedule.inverse_time(self.c, self.T)


def sample_path(n, K, scheme, rng):
    """Draw an index path: K uniform permutations (without replacement) or
    T = nK i.i.d. uniform indices (with replacement)."""
    if n < 1 or K < 1:
        raise DomainError("need n >= 1 and K >= 1")
    if scheme == WITHOUT_REPLACEMENT:
        idx = np.concatenate([rng.permutation(n) for _ in range(K)])
    elif scheme == WITH_REPLACEMENT:
        idx = rng.integers(0, n, size=n * K)
    else:
        raise DomainError(f"unknown sampling scheme {scheme!r}")
    return SgldPath(indices=idx, n=n)


def per_sample_budgets(path, schedule, L):
    """Post-relaxation budgets B_i = sum_{tau in T_i} eta^2 L^2 / sigma^2."""
    if path.T != schedule.T:
        raise DomainError("path and schedule lengths differ")
    rates = schedule.info_rates(L)
    budgets = np.zeros(path.n)
    np.add.at(budgets, path.indices, rates)
    return budgets


def per_step_mi_terms(schedule, L, d):
    """Pre-relaxation per-iteration MI increments (d/2) log(1 + eta^2 L^2 /
    (d sigma^2)), next to their log(1+x) <= x relaxations eta^2 L^2 /
    (2 sigma^2).  Returned as (exact_terms, relaxed_terms)."""
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    x = schedule.info_rates(L) / d
    return 0.5 * d * np.log1p(x), 0.5 * d * x


def ismi_bound_per_path(path, schedule, L, R, n=None):
    """(R/n) sum_i sqrt(B_i) for this path's per-sample budgets."""
    n = path.n if n is None else n
    budgets = per_sample_budgets(path, schedule, L)
    return R / n * float(np.sqrt(budgets).sum())


def ismi_bound_from_sets(iteration_sets, schedule, L, R, n=None):
    """Same bound computed from an explicit {T_i} partition (1-based)."""
    n = len(iteration_sets) if n is None else n
    rates = schedule.info_rates(L)
    total = 0.0
    for s in iteration_sets:
        s = np.asarray(s, dtype=np.int64)
        total += math.sqrt(rates[s - 1].sum()) if s.size else 0.0
    return R / n * total


def analytic_ismi_bound(n, K, c, L, R):
    """Closed-form path bound for the inverse-time schedule without
    replacement: (R L sqrt(c) / n) sum_i sqrt(1/i + (log(K-1) + 1)/n)."""
    if K < 2:
        raise DomainError(f"the closed form needs K >= 2, got {K}")
    if n < 1 or not (c > 0 and L > 0 and R > 0):
        raise DomainError("need n >= 1 and positive c, L, R")
    tail = (math.log(K - 1.0) + 1.0) / n
    i = np.arange(1, n + 1, dtype=float)
    return R * L * math.sqrt(c) / n * float(np.sqrt(1.0 / i + tail).sum())


def integral_ismi_bound(n, K, c, L, R):
    """The integral relaxation of the analytic bound:
    (R L sqrt(c) / sqrt(n)) * (sqrt(1+A) + asinh(sqrt(A))/sqrt(A)),
    A = 1 + log(K-1); an asymptotic cross-check of the summed form."""
    if K < 2:
        raise DomainError(f"the closed form needs K >= 2, got {K}")
    a = 1.0 + math.log(K - 1.0)
    value = math.sqrt(1.0 + a) + math.asinh(math.sqrt(a)) / math.sqrt(a)
    return R * L * math.sqrt(c) / math.sqrt(n) * value


def pensia_bound(n, K, c, L, R):
    """Full-dataset baseline for the same schedule:
    (R L / sqrt(n)) sqrt(c log(nK) + c)."""
    if n < 1 or K < 1:
        raise DomainError("need n >= 1 and K >= 1")
    if c == 0:
        return 0.0
    if not (c > 0 and L > 0 and R > 0):
        raise DomainError("need nonnegative c and positive L, R")
    return R * L / math.sqrt(n) * math.sqrt(c * math.log(n * K) + c)


def baseline_bound_schedule(schedule, L, R, n):
    """Schedule-level baseline sqrt((R^2/n) sum_t eta^2 L^2 / sigma^2)."""
    return math.sqrt(R * R / n * float(schedule.info_rates(L).sum()))


def monte_carlo_path_bound(n, K, c, L, R, paths, seed, threads=1):
    """Mean and standard error of the per-path bound over sampled
    without-replacement paths (vectorized, deterministic substreams)."""
    if paths < 2:
        raise DomainError("need at least 2 paths")
    rates_by_epoch = []
    for k in range(K):
        t = np.arange(k * n + 1, (k + 1) * n + 1, dtype=float)
        rates_by_epoch.append((c / t) * L * L)  # eta^2 L^2 / sigma^2 = eta L^2
    sizes = chunk_sizes(paths, _PATH_CHUNK)

    def run_chunk(ci):
        rng = substream(seed, ci)
        m = sizes[ci]
        budgets = np.zeros((m, n))
        rows = np.arange(m)[:, None]
        for k in range(K):
            perm = np.argsort(rng.random((m, n)), axis=1)
            budgets[rows, perm] += rates_by_epoch[k][None, :]
        vals = R / n * np.sqrt(budgets).sum(axis=1)
        return vals.sum(), (vals * vals).sum()

    parts = map_chunks(run_chunk, len(sizes), threads)
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / paths
    var = max(total_sq - paths * mean * mean, 0.0) / (paths - 1)
    return mean, math.sqrt(var / paths)


def run_sgld(dataset, config, rng, w0=None, noise_free=False):
    """Demonstration SGLD run on the logistic loss: returns the iterate
    trajectory (T+1, d) and the sampled path.

    Gradients are clipped to norm L, enforcing the bounded-gradient
    assumption by construction; noise is sigma_t * xi with xi standard
    normal (suppressed entirely under ``noise_free``, giving plain SGD).
    The bound computations never consult these trajectories.
    """
    features, labels = dataset
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if features.shape[0] != config.n or labels.shape[0] != config.n:
        raise DomainError("dataset size does not match config.n")
    if features.shape[1] != config.d:
        raise DomainError("feature dimension does not match config.d")
    schedule = config.schedule()
    path = sample_path(config.n, config.K, config.scheme, rng)
    w = np.zeros(config.d) if w0 is None else np.asarray(w0, dtype=float).copy()
    traj = np.empty((config.T + 1, config.d))
    traj[0] = w
    noise = rng.standard_normal((config.T, config.d))
    for t in range(config.T):
        x, y = features[path.indices[t]], labels[path.indices[t]]
        margin = y * float(w @ x)
        g = -y * _sigmoid(-margin) * x
        g_norm = float(np.linalg.norm(g))
        if g_norm > config.L:
            g = g * (config.L / g_norm)
        w = w - schedule.etas[t] * g
        if not noise_free:
            w = w + schedule.sigmas[t] * noise[t]
        traj[t + 1] = w
    return traj, path


def _sigmoid(x):
    return 0.5 * (1.0 + math.tanh(0.5 * x))
