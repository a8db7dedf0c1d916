"""Per-sample mutual-information generalization bounds.

A library and CLI for computing analytic generalization-error bounds built
from the mutual information between individual training samples and the
learned hypothesis, validating them against exact/Monte-Carlo errors on
worked examples (Gaussian mean estimation, linear loss on the circle,
SGLD), and estimating the bound empirically for logistic regression via
k-nearest-neighbor mutual-information estimation.
"""

from .bounds import GenBound, MiProfile, full_mi_bound, ismi_bound, sub_gaussian_ismi
from .cgf import (
    CgfBound,
    SubGaussianBound,
    chi_squared_neg_cgf,
    legendre_dual_inverse,
    sub_gaussian_cgf,
)
from .errors import (
    DegenerateCloud,
    DomainError,
    GenboundError,
    NonConvergence,
    NonNormalized,
    PreconditionError,
)
from .kdtree import KdTree, brute_force_knn, knn_search
from .mi_estimate import (
    Density1D,
    SampleCloud,
    differential_entropy,
    expectation_over_rayleigh,
    knn_mi,
)
from .mi_exact import (
    DiscreteJoint,
    GaussianJointSpec,
    chain_rule_gap,
    discrete_mi,
    gaussian_mi,
    random_product_joint,
)

__version__ = "0.1.0"

__all__ = [
    "CgfBound",
    "Density1D",
    "DegenerateCloud",
    "DiscreteJoint",
    "DomainError",
    "GaussianJointSpec",
    "GenBound",
    "GenboundError",
    "KdTree",
    "MiProfile",
    "NonConvergence",
    "NonNormalized",
    "PreconditionError",
    "SampleCloud",
    "SubGaussianBound",
    "brute_force_knn",
    "chain_rule_gap",
    "chi_squared_neg_cgf",
    "differential_entropy",
    "discrete_mi",
    "expectation_over_rayleigh",
    "full_mi_bound",
    "gaussian_mi",
    "ismi_bound",
    "knn_mi",
    "knn_search",
    "legendre_dual_inverse",
    "random_product_joint",
    "sub_gaussian_cgf",
    "sub_gaussian_ismi",
]
