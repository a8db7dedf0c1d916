"""Linear loss on the unit circle: ERM and noisy ERM over 2-D Gaussian data.

The hypothesis is a point on the unit circle written w = (sin phi, cos phi);
the loss is -<w, Z> with Z standard normal in the plane, so ERM picks the
phase of the sample mean and the exact generalization error is the mean of
a Rayleigh norm, sqrt(pi / (2 n)).  Conditionally on |Z_i| = r the ERM
phase follows a projected-normal density with concentration r / sqrt(n-1);
integrating its entropy against the Rayleigh law of |Z_i| gives the
per-sample mutual information, hence the bound sqrt(2 I).  The chained
reference curve is pinned to its published single-sample value 19.0352 and
scaled by 1/sqrt(n).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erfc

from .bounds import MiProfile, sub_gaussian_ismi
from .errors import DomainError
from .mi_estimate import Density1D, differential_entropy, expectation_over_rayleigh
from .seeding import chunk_sizes, map_chunks, substream

TWO_PI = 2.0 * math.pi
CMI_SINGLE_SAMPLE = 19.0352
_MC_CHUNK_SCALARS = 2**24


@dataclass(frozen=True)
class GpParams:
    """Sample count n and the atom mass epsilon of the phase noise at 0."""

    n: int
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"need n >= 1, got {self.n}")
        if self.epsilon is not None and not (0.0 <= self.epsilon <= 1.0):
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")


def gaussian_q(x):
    """Standard normal complementary CDF via erfc (accurate to ~1e-16)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


@dataclass(frozen=True)
class PhaseDensity:
    """Conditional ERM-phase density given |Z_i| = r, measured from the
    conditioning direction, on [0, 2*pi).

    f(phi) = exp(-r^2/(2(n-1))) / (2 pi)
           + (r cos phi / sqrt(2 pi (n-1)))
             * exp(-r^2 sin^2 phi / (2(n-1))) * Q(-r cos phi / sqrt(n-1)),

    the projected-normal phase law with concentration r / sqrt(n-1).  With
    noise mass epsilon the density is the mixture
    (1 - eps)/(2 pi) + eps * f(phi).
    """

    r: float
    n: int
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.r < 0:
            raise DomainError(f"conditioning radius must be >= 0, got {self.r}")
        if self.n < 2:
            raise DomainError(f"the conditional law needs n >= 2, got {self.n}")
        if self.epsilon is not None and not (0.0 <= self.epsilon <= 1.0):
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        m = self.n - 1.0
        c = np.cos(phi)
        base = (math.exp(-self.r * self.r / (2.0 * m)) / TWO_PI
                + self.r * c / math.sqrt(TWO_PI * m)
                * np.exp(-self.r * self.r * np.sin(phi) ** 2 / (2.0 * m))
                * gaussian_q(-self.r * c / math.sqrt(m)))
        if self.epsilon is None:
            return base
        return (1.0 - self.epsilon) / TWO_PI + self.epsilon * base

    def as_density1d(self, tol=1e-9):
        return Density1D(pdf=self, support=(0.0, TWO_PI), tol=tol)


def phase_density(r, n):
    return PhaseDensity(r=r, n=n)


def phase_density_noisy(r, n, epsilon):
    return PhaseDensity(r=r, n=n, epsilon=float(epsilon))


def erm_phase(samples):
    """Phase of the sample-mean direction, in [0, 2*pi).

    Convention w = (sin phi, cos phi): phi = atan2(m_x, m_y).  An exactly
    zero mean vector (probability-0 event) maps to phase 0.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 2:
        m = samples.mean(axis=0)
        return float(np.arctan2(m[0], m[1]) % TWO_PI)
    m = samples.mean(axis=1)
    return np.arctan2(m[..., 0], m[..., 1]) % TWO_PI


def sample_noise(epsilon, rng, size=None):
    """Phase noise: an atom of mass epsilon at 0, else uniform on (-pi, pi)."""
    if not (0.0 <= epsilon <= 1.0):
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    u = rng.uniform(-math.pi, math.pi, size=size)
    keep = rng.random(size=size) < epsilon
    return np.where(keep, 0.0, u)


def noisy_erm_phase(samples, epsilon, rng):
    """ERM phase plus the atom-or-uniform noise, wrapped mod 2*pi."""
    phi = (erm_phase(samples) + sample_noise(epsilon, rng)) % TWO_PI
    return float(phi) if np.ndim(phi) == 0 else phi


def exact_gen_erm(n):
    """Exact generalization error sqrt(pi / (2 n))."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    return math.sqrt(math.pi / (2.0 * n))


def exact_gen_noisy(n, epsilon):
    """Noise with independent atom mass epsilon scales the exact error."""
    if not (0.0 <= epsilon <= 1.0):
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    return epsilon * exact_gen_erm(n)


def cmi_reference(n):
    """Chained-bound reference curve: published n=1 value over sqrt(n)."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    return CMI_SINGLE_SAMPLE / math.sqrt(n)


def ismi_gp(n, epsilon=None, entropy_tol=1e-9, outer_tol=1e-9):
    """Per-sample MI in nats: log(2 pi) minus the Rayleigh-averaged entropy
    of the conditional phase density.  Requires n >= 2.
    """
    if n < 2:
        raise DomainError(f"the conditional phase law needs n >= 2, got {n}")

    def conditional_entropy(r):
        dens = PhaseDensity(r=float(r), n=n, epsilon=epsilon)
        return differential_entropy(dens.as_density1d(tol=entropy_tol))

    avg_entropy = expectation_over_rayleigh(conditional_entropy, scale=1.0,
                                            tol=outer_tol)
    return max(math.log(TWO_PI) - avg_entropy, 0.0)


def ismi_bound_gp(n, epsilon=None):
    """The bound sqrt(2 I(W;Z_i)); +inf at n=1 where W is determined by Z_1."""
    if n == 1:
        return math.inf
    mi = ismi_gp(n, epsilon=epsilon)
    return sub_gaussian_ismi(MiProfile(np.array([mi])), R=1.0).gen_upper


def monte_carlo_gen(n, trials, seed, epsilon=None, threads=1):
    """Monte Carlo generalization error of ERM (or noisy ERM): (mean, se).

    The population term vanishes exactly (W is independent of fresh data),
    so each trial contributes -L_S(W) = <w, sample mean>.
    """
    if trials < 100:
        raise DomainError(f"need at least 100 trials, got {trials}")
    chunk = max(1, _MC_CHUNK_SCALARS // (2 * n))
    sizes = chunk_sizes(trials, chunk)

    def run_chunk(ci):
        rng = substream(seed, ci)
        z = rng.standard_normal((sizes[ci], n, 2))
        phi = erm_phase(z)
        if epsilon is not None:
            phi = (phi + sample_noise(epsilon, rng, size=sizes[ci])) % TWO_PI
        m = z.mean(axis=1)
        w = np.stack([np.sin(phi), np.cos(phi)], axis=1)
        gap = (w * m).sum(axis=1)
        return gap.sum(), (gap * gap).sum()

    parts = map_chunks(run_chunk, len(sizes), threads)
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / trials
    var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
    return mean, math.sqrt(var / trials)


def sample_conditional_phases(r, n, trials, seed):
    """Draw ERM phases conditioned on |Z_1| = r, measured from Z_1's direction.

    Z_1 is pinned at phase 0 (the vector (0, r)); the other n-1 samples are
    standard normal.  The output lies in [0, 2*pi) and follows
    PhaseDensity(r, n) exactly.
    """
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    rng = substream(seed, 0)
    rest = rng.standard_normal((trials, n - 1, 2)).sum(axis=1)
    mx = rest[:, 0] / n
    my = (r + rest[:, 1]) / n
    return np.arctan2(mx, my) % TWO_PI


def phase_ks_distance(r, n, trials, seed, epsilon=None, grid=1 << 15):
    """Kolmogorov-Smirnov distance between sampled conditional phases and the
    analytic PhaseDensity CDF (dense Simpson grid, error ~ grid^-4)."""
    phases = sample_conditional_phases(r, n, trials, seed)
    if epsilon is not None:
        rng = substream(seed, 1)
        phases = (phases + sample_noise(epsilon, rng, size=trials)) % TWO_PI
    dens = PhaseDensity(r=r, n=n, epsilon=epsilon)
    xs = np.linspace(0.0, TWO_PI, grid + 1)
    pdf = dens(xs)
    h = TWO_PI / grid
    # cumulative trapezoid, renormalized to end exactly at 1
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * h)])
    cdf /= cdf[-1]
    s = np.sort(phases)
    theo = np.interp(s, xs, cdf)
    k = len(s)
    emp_hi = np.arange(1, k + 1) / k
    emp_lo = np.arange(0, k) / k
    return float(np.max(np.maximum(np.abs(emp_hi - theo), np.abs(theo - emp_lo))))


def experiment_row(n, trials, seed, epsilon=None, threads=1):
    """One CSV row of the circle experiment at sample count n."""
    gen_mc, gen_mc_se = monte_carlo_gen(n, trials, seed, epsilon=epsilon,
                                        threads=threads)
    if n == 1:
        mi = math.inf
    else:
        mi = ismi_gp(n, epsilon=epsilon)
    exact = exact_gen_erm(n) if epsilon is None else exact_gen_noisy(n, epsilon)
    return {
        "n": n,
        "epsilon": 1.0 if epsilon is None else epsilon,
        "gen_exact": exact,
        "gen_mc": gen_mc,
        "gen_mc_se": gen_mc_se,
        "mi_per_sample": mi,
        "ismi_bound": math.inf if math.isinf(mi) else math.sqrt(2.0 * mi),
        "cmi_reference": cmi_reference(n),
    }
