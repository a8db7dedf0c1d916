"""Assemble generalization-error bounds from MI values and CGF bounds.

Conventions: mutual informations are clamped at 0 before use (estimators
can return small negatives), and +inf is an ordinary sentinel value that
flows through the arithmetic — deterministic algorithms have infinite
full-dataset information, and the comparison against that sentinel is the
point of the per-sample bounds.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cgf import legendre_dual_inverse, sub_gaussian_cgf
from .errors import DomainError


@dataclass(frozen=True)
class MiProfile:
    """Per-sample mutual informations I(W;Z_i), optional full-dataset I(S;W)."""

    per_sample: np.ndarray
    full_dataset: Optional[float] = None

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.per_sample, dtype=float))
        object.__setattr__(self, "per_sample", v)
        if v.size < 1:
            raise DomainError("profile needs at least one per-sample MI")
        if np.any(v < -1e-9) or np.isnan(v).any():
            raise DomainError("per-sample MI values must be nonnegative")
        if self.full_dataset is not None and self.full_dataset < 0:
            raise DomainError("full-dataset MI must be nonnegative")

    @property
    def n(self):
        return self.per_sample.size

    def clamped(self):
        return np.maximum(self.per_sample, 0.0)


@dataclass(frozen=True)
class GenBound:
    """Two-sided generalization bound: gen <= gen_upper, -gen <= neg_gen_upper."""

    gen_upper: float
    neg_gen_upper: float
    method: str
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gen_upper < 0 or self.neg_gen_upper < 0:
            raise DomainError("bound values must be nonnegative")


def ismi_bound(profile, psi_plus, psi_minus):
    """Per-sample-MI bound: gen <= mean_i psi_minus_dual_inv(I_i) and
    -gen <= mean_i psi_plus_dual_inv(I_i).

    Either CGF bound may be None when only one side is needed; that side is
    reported as +inf.
    """
    values = profile.clamped()

    def side(bound):
        if bound is None:
            return math.inf
        if not np.all(np.isfinite(values)):
            return math.inf
        return float(np.mean([legendre_dual_inverse(bound, y) for y in values]))

    return GenBound(
        gen_upper=side(psi_minus),
        neg_gen_upper=side(psi_plus),
        method="ismi",
        inputs={"n": profile.n,
                "psi_plus": getattr(psi_plus, "label", None),
                "psi_minus": getattr(psi_minus, "label", None)},
    )


def sub_gaussian_ismi(profile, R):
    """Symmetric sub-Gaussian form: |gen| <= mean_i sqrt(2 R^2 I_i)."""
    if not (R > 0):
        raise DomainError(f"sub-Gaussian parameter must be positive, got {R}")
    values = profile.clamped()
    if not np.all(np.isfinite(values)):
        b = math.inf
    else:
        b = float(np.mean(np.sqrt(2.0 * R * R * values)))
    return GenBound(gen_upper=b, neg_gen_upper=b, method="ismi-subgaussian",
                    inputs={"n": profile.n, "R": R})


def full_mi_bound(i_sw, n, R):
    """Full-dataset bound sqrt(2 R^2 I(S;W) / n); +inf propagates."""
    if i_sw < 0:
        raise DomainError(f"full-dataset MI must be nonnegative, got {i_sw}")
    if n < 1:
        raise DomainError(f"sample count must be >= 1, got {n}")
    if not (R > 0):
        raise DomainError(f"sub-Gaussian parameter must be positive, got {R}")
    if math.isinf(i_sw):
        return math.inf
    return math.sqrt(2.0 * R * R * i_sw / n)


def profile_from_discrete_joint(joint):
    """MiProfile (per-sample and full-dataset MI) from a DiscreteJoint oracle."""
    from .mi_exact import discrete_mi

    n = joint.n_samples
    per = [discrete_mi(joint, (0,), (i,)) for i in range(1, n + 1)]
    full = discrete_mi(joint, (0,), tuple(range(1, n + 1)))
    return MiProfile(per_sample=np.array(per), full_dataset=full)
