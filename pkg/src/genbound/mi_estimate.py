"""Estimated information quantities: 1-D differential entropy by quadrature
and k-nearest-neighbor mutual information from paired samples.

The kNN estimator is the bias-improved ("revised") KSG variant: with
max-norm distances the unit-ball volume correction vanishes and the
estimate reduces to

    I_hat = digamma(k) + log N - mean_i [ log n_w(i) + log n_z(i) ],

where n_w(i), n_z(i) count points whose marginal distance from point i is
at most its k-th nearest-neighbor distance in the joint space (closed
ball, so each count is >= k and the independence bias cancels; open-ball
counting inflates every log by ~1/(2n)).  The classic KSG-1 form (strict
counts with digamma(n+1)) is kept as a flagged fallback.  Exact distance
ties, common for embedded discrete coordinates, are split beforehand by a
deterministic index-derived jitter of magnitude 1e-12.
"""

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.special import digamma

from . import quadrature
from .errors import DegenerateCloud, DomainError, NonNormalized
from .kdtree import KdTree

REVISED_KSG = "revised-ksg"
CLASSIC_KSG = "ksg-1"

_TINY_DENSITY = 1e-300
_JITTER_SCALE = 1e-12
_VECTOR_BACKEND_MIN_N = 2048


@dataclass(frozen=True)
class Density1D:
    """An evaluable probability density on [a, b) with its quadrature config."""

    pdf: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]
    tol: float = quadrature.DEFAULT_TOL
    initial_panels: int = quadrature.INITIAL_PANELS
    max_doublings: int = quadrature.MAX_DOUBLINGS

    def __post_init__(self):
        a, b = self.support
        if not (b > a):
            raise DomainError(f"support must be a nonempty interval, got {self.support}")

    def mass(self):
        """Total integral of the density over its support."""
        a, b = self.support
        return quadrature.integrate(self.pdf, a, b, tol=self.tol,
                                    initial_panels=self.initial_panels,
                                    max_doublings=self.max_doublings)


def differential_entropy(density):
    """-integral p log p over the support, in nats.

    p log p is treated as 0 wherever p < 1e-300.  Panels double until two
    successive entropy estimates differ by less than the density's
    tolerance; raises NonNormalized when the density mass strays more than
    1e-4 from 1, NonConvergence when refinement stalls.
    """
    a, b = density.support

    def integrand(x):
        p = np.asarray(density.pdf(x), dtype=float)
        if np.any(p < -1e-12):
            raise DomainError("density evaluated negative")
        p = np.maximum(p, 0.0)
        out = np.zeros_like(p)
        big = p >= _TINY_DENSITY
        out[big] = -p[big] * np.log(p[big])
        return out

    ent = quadrature.integrate(integrand, a, b, tol=density.tol,
                               initial_panels=density.initial_panels,
                               max_doublings=density.max_doublings)
    mass = density.mass()
    if abs(mass - 1.0) > 1e-4:
        raise NonNormalized(f"density integrates to {mass!r}, expected 1")
    return ent


def rayleigh_pdf(r, scale=1.0):
    r = np.asarray(r, dtype=float)
    s2 = scale * scale
    return (r / s2) * np.exp(-r * r / (2.0 * s2))


def expectation_over_rayleigh(f, scale=1.0, truncation=None, tol=1e-9,
                              vectorized=False):
    """E[f(R)] for R Rayleigh(scale), truncated where the tail is negligible.

    The default truncation 8*scale leaves tail mass exp(-32) < 1e-12.
    ``f`` is called per scalar node unless ``vectorized``.
    """
    if not (scale > 0):
        raise DomainError(f"Rayleigh scale must be positive, got {scale}")
    r_max = 8.0 * scale if truncation is None else float(truncation)

    if vectorized:
        def integrand(r):
            return np.asarray(f(r), dtype=float) * rayleigh_pdf(r, scale)
    else:
        def integrand(r):
            r = np.asarray(r, dtype=float)
            vals = np.array([float(f(x)) for x in r.ravel()]).reshape(r.shape)
            return vals * rayleigh_pdf(r, scale)

    return quadrature.integrate(integrand, 0.0, r_max, tol=tol)


@dataclass(frozen=True)
class SampleCloud:
    """N paired draws: w-part (N, d_w) and z-part (N, d_z), max-norm metric."""

    w: np.ndarray
    z: np.ndarray
    k: int = 5

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        if z.ndim == 1:
            z = z[:, None]
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "z", z)
        if w.shape[0] != z.shape[0]:
            raise DomainError("w-part and z-part must have equal row counts")
        if not (self.k >= 1 and w.shape[0] > self.k):
            raise DomainError(f"need N > k >= 1, got N={w.shape[0]}, k={self.k}")
        if np.isnan(w).any() or np.isnan(z).any():
            raise DomainError("sample cloud contains NaN entries")

    @property
    def n(self):
        return self.w.shape[0]


def _splitmix64(x):
    """splitmix64 hash of a uint64 array; deterministic tie-breaking source."""
    x = (x + np.uint64(0x9E3779B97F4A7C15)).astype(np.uint64)
    x ^= x >> np.uint64(30)
    x = (x * np.uint64(0xBF58476D1CE4E5B9)).astype(np.uint64)
    x ^= x >> np.uint64(27)
    x = (x * np.uint64(0x94D049BB133111EB)).astype(np.uint64)
    x ^= x >> np.uint64(31)
    return x


def _index_jitter(n_rows, n_cols):
    """Deterministic per-entry perturbations in [-1e-12, 1e-12]."""
    flat = np.arange(n_rows * n_cols, dtype=np.uint64)
    u = _splitmix64(flat).astype(np.float64) / float(2**64)
    return ((u - 0.5) * (2.0 * _JITTER_SCALE)).reshape(n_rows, n_cols)


def _pairwise_max_norm(block, points):
    """Max-norm distances from each row of ``block`` to every row of ``points``."""
    d = np.abs(block[:, None, 0] - points[None, :, 0])
    for j in range(1, points.shape[1]):
        np.maximum(d, np.abs(block[:, None, j] - points[None, :, j]), out=d)
    return d


def _knn_radii_vector(joint, k):
    """k-th NN max-norm distance per row (self excluded), chunked brute force."""
    n = joint.shape[0]
    radii = np.empty(n)
    chunk = max(1, int(2**21 // max(1, n)))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d = _pairwise_max_norm(joint[start:stop], joint)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        radii[start:stop] = np.partition(d, k - 1, axis=1)[:, k - 1]
    return radii


def _marginal_counts_vector(part, radii, strict):
    """Rows with marginal distance below (or within) each row's radius."""
    n = part.shape[0]
    counts = np.empty(n, dtype=np.int64)
    chunk = max(1, int(2**21 // max(1, n)))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d = _pairwise_max_norm(part[start:stop], part)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        r = radii[start:stop, None]
        counts[start:stop] = ((d < r) if strict else (d <= r)).sum(axis=1)
    return counts


def _knn_radii_tree(joint, k):
    tree = KdTree(joint)
    radii = np.empty(joint.shape[0])
    for i in range(joint.shape[0]):
        dists, _ = tree.query(joint[i], k + 1)  # +1 covers the self-match
        radii[i] = dists[k]
    return radii


def _marginal_counts_tree(part, radii, strict):
    tree = KdTree(part)
    counts = np.empty(part.shape[0], dtype=np.int64)
    if not strict:
        # closed ball: post-jitter distances are distinct, so nudging the
        # strict radius up by one ulp turns < into <=
        radii = np.nextafter(radii, np.inf)
    for i in range(part.shape[0]):
        counts[i] = tree.count_within(part[i], radii[i]) - 1  # self sits at 0
    return counts


def knn_mi(cloud, variant=REVISED_KSG, backend="auto"):
    """kNN mutual-information estimate I(w-part; z-part) in nats.

    backend "vector" uses chunked exact distance matrices, "kdtree" uses the
    max-norm tree; both are exact and interchangeable ("auto" picks by N).
    Estimates can come out slightly negative under independence; callers
    clamp before feeding bounds.
    """
    if variant not in (REVISED_KSG, CLASSIC_KSG):
        raise DomainError(f"unknown estimator variant {variant!r}")
    if backend == "auto":
        backend = "vector" if cloud.n >= _VECTOR_BACKEND_MIN_N else "kdtree"
    if backend not in ("vector", "kdtree"):
        raise DomainError(f"unknown backend {backend!r}")

    n, k = cloud.n, cloud.k
    joint = np.hstack([cloud.w, cloud.z])
    joint = joint + _index_jitter(*joint.shape)
    w = joint[:, :cloud.w.shape[1]]
    z = joint[:, cloud.w.shape[1]:]
    strict = variant == CLASSIC_KSG  # the revised form counts closed balls

    if backend == "vector":
        radii = _knn_radii_vector(joint, k)
        n_w = _marginal_counts_vector(w, radii, strict)
        n_z = _marginal_counts_vector(z, radii, strict)
    else:
        radii = _knn_radii_tree(joint, k)
        n_w = _marginal_counts_tree(w, radii, strict)
        n_z = _marginal_counts_tree(z, radii, strict)

    if np.any(n_w <= 0) or np.any(n_z <= 0):
        constant_cols = [
            j for part in (cloud.w, cloud.z)
            for j in np.nonzero(np.ptp(part, axis=0) == 0.0)[0]
        ]
        raise DegenerateCloud(
            "empty neighborhoods (zero-count rows); constant columns: "
            f"{constant_cols}")

    if variant == REVISED_KSG:
        return float(digamma(k) + math.log(n)
                     - np.mean(np.log(n_w) + np.log(n_z)))
    return float(digamma(k) + digamma(n)
                 - np.mean(digamma(n_w + 1) + digamma(n_z + 1)))
