"""Exact mutual information: finite discrete joints and Gaussian closed forms.

These are the ground-truth oracles the rest of the package is tested
against: a brute-force MI over an explicit probability tensor on
(W, Z_1, ..., Z_n), and the log-determinant formula for jointly Gaussian
pairs.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

_SUM_TOL = 1e-12


def _entropy(p):
    """Shannon entropy in nats with 0 log 0 := 0."""
    p = np.asarray(p, dtype=float).ravel()
    nz = p > 0
    return float(-(p[nz] * np.log(p[nz])).sum())


@dataclass(frozen=True)
class DiscreteJoint:
    """Explicit joint probability tensor over (W, Z_1, ..., Z_n).

    Axis 0 indexes W; axes 1..n index the samples Z_i.  Entries must be
    nonnegative and sum to 1 within 1e-12.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "table", t)
        if t.ndim < 2:
            raise DomainError("joint needs at least axes (W, Z_1)")
        if np.any(t < 0):
            raise DomainError("joint probabilities must be nonnegative")
        if abs(t.sum() - 1.0) > _SUM_TOL:
            raise DomainError(f"joint must sum to 1 (got {t.sum()!r})")

    @property
    def n_samples(self):
        return self.table.ndim - 1

    @property
    def alphabet_sizes(self):
        return self.table.shape

    def marginal(self, coords):
        """Marginal over the given axis indices, axes kept in given order."""
        coords = tuple(coords)
        drop = tuple(ax for ax in range(self.table.ndim) if ax not in coords)
        m = self.table.sum(axis=drop) if drop else self.table
        kept = [ax for ax in range(self.table.ndim) if ax in coords]
        perm = [kept.index(c) for c in coords]
        return np.transpose(m, perm)


def discrete_mi(joint, coords_a, coords_b):
    """Mutual information I(coords_a; coords_b) in nats from the joint table."""
    coords_a, coords_b = tuple(coords_a), tuple(coords_b)
    if set(coords_a) & set(coords_b):
        raise DomainError(f"coordinate sets overlap: {coords_a} vs {coords_b}")
    p_ab = joint.marginal(coords_a + coords_b)
    p_a = p_ab.reshape(int(np.prod(p_ab.shape[:len(coords_a)])), -1).sum(axis=1)
    p_b = p_ab.reshape(int(np.prod(p_ab.shape[:len(coords_a)])), -1).sum(axis=0)
    return _entropy(p_a) + _entropy(p_b) - _entropy(p_ab)


@dataclass(frozen=True)
class GaussianJointSpec:
    """Covariance blocks of a jointly Gaussian pair (A, B).

    cov_a is Cov[A], cov_b is Cov[B], cross is Cov[A, B] (shape d_a x d_b).
    """

    cov_a: np.ndarray
    cov_b: np.ndarray
    cross: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.cov_a, dtype=float))
        b = np.atleast_2d(np.asarray(self.cov_b, dtype=float))
        c = np.atleast_2d(np.asarray(self.cross, dtype=float))
        if a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
            raise DomainError("covariance blocks must be square")
        if c.shape != (a.shape[0], b.shape[0]):
            raise DomainError("cross-covariance shape mismatch")
        object.__setattr__(self, "cov_a", a)
        object.__setattr__(self, "cov_b", b)
        object.__setattr__(self, "cross", c)

    def joint(self):
        return np.block([[self.cov_a, self.cross], [self.cross.T, self.cov_b]])


def gaussian_mi(spec):
    """I(A; B) = 1/2 log(|Cov A| |Cov B| / |Cov joint|) in nats.

    Returns math.inf when the joint covariance is numerically singular
    (deterministic dependence); never raises for that case.
    """
    sign_a, logdet_a = np.linalg.slogdet(spec.cov_a)
    sign_b, logdet_b = np.linalg.slogdet(spec.cov_b)
    if sign_a <= 0 or sign_b <= 0:
        raise DomainError("marginal covariance blocks must be positive definite")
    sign_j, logdet_j = np.linalg.slogdet(spec.joint())
    if sign_j <= 0:
        return math.inf
    mi = 0.5 * (logdet_a + logdet_b - logdet_j)
    return max(mi, 0.0) if mi > -1e-9 else mi


def z_marginal_product_gap(joint):
    """Max deviation of the Z-marginal from the product of its factors."""
    n = joint.n_samples
    p_z = joint.table.sum(axis=0)
    factors = [joint.marginal((i,)) for i in range(1, n + 1)]
    prod = factors[0]
    for f in factors[1:]:
        prod = np.multiply.outer(prod, f)
    return float(np.max(np.abs(p_z - prod)))


def chain_rule_gap(joint, tol=1e-9):
    """Return (I(W;S), sum_i I(W;Z_i)) for a joint with independent Z's.

    Raises PreconditionError when the Z-marginal is not a product
    distribution within ``tol``.
    """
    gap = z_marginal_product_gap(joint)
    if gap > tol:
        raise PreconditionError(
            f"Z-marginal deviates from a product distribution by {gap:.3e}")
    n = joint.n_samples
    i_ws = discrete_mi(joint, (0,), tuple(range(1, n + 1)))
    i_sum = sum(discrete_mi(joint, (0,), (i,)) for i in range(1, n + 1))
    return i_ws, i_sum


def random_product_joint(rng, w_size, z_sizes):
    """Random DiscreteJoint whose Z-marginal is a product by construction.

    Z factor probabilities and the conditional P(W | z_1..z_n) are drawn
    from normalized exponentials, so every cell stays strictly positive.
    """
    z_sizes = tuple(int(s) for s in z_sizes)
    factors = [rng.exponential(size=s) for s in z_sizes]
    factors = [f / f.sum() for f in factors]
    p_z = factors[0]
    for f in factors[1:]:
        p_z = np.multiply.outer(p_z, f)
    cond_w = rng.exponential(size=(int(w_size),) + z_sizes)
    cond_w /= cond_w.sum(axis=0, keepdims=True)
    table = cond_w * p_z[None, ...]
    table /= table.sum()
    return DiscreteJoint(table)
