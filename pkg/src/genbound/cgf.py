"""Convex upper bounds on cumulant generating functions and their dual inverses.

A bound ``psi`` on a CGF, convex on [0, b) with psi(0) = psi'(0) = 0, turns a
mutual-information value y into a generalization-error contribution through
the inverse Legendre dual

    dual_inverse(y) = inf over lam in (0, b) of (y + psi(lam)) / lam.

Two closed-form families cover all uses in this package: the quadratic
sub-Gaussian bound R^2 lam^2 / 2 and the quadratic chi-squared tail bound
d sigma^4 lam^2; everything else falls back to a derivative-free numeric
minimization over log lam.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NonConvergence

CLOSED_FORM = "closed-form"
NUMERIC = "numeric"

_REL_TOL = 1e-8
_BRACKET_BUDGET = 400
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CgfBound:
    """A convex CGF upper bound psi on [0, b) plus optional closed-form inverse.

    ``psi`` maps lambda (or a numpy array of lambdas) to nats.  When
    ``inverse_kind`` is "closed-form", ``closed_inverse`` evaluates the
    inverse dual directly.  ``exact_cgf``, when present, is the exact CGF the
    bound dominates (kept for validation).
    """

    psi: Callable[[float], float]
    b: float = math.inf
    inverse_kind: str = NUMERIC
    closed_inverse: Optional[Callable[[float], float]] = None
    exact_cgf: Optional[Callable[[float], float]] = None
    label: str = "cgf-bound"
    _validated: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if not (self.b > 0):
            raise DomainError(f"domain endpoint b must be positive, got {self.b}")
        if self.inverse_kind not in (CLOSED_FORM, NUMERIC):
            raise DomainError(f"unknown inverse_kind {self.inverse_kind!r}")
        if self.inverse_kind == CLOSED_FORM and self.closed_inverse is None:
            raise DomainError("closed-form bound needs a closed_inverse")

    def lam_max(self):
        """Largest admissible lambda (open endpoints clamped just inside)."""
        return self.b * (1.0 - 1e-12) if math.isfinite(self.b) else math.inf

    def validate(self, grid_points=64, tol=1e-6):
        """Check psi(0)=0, psi'(0+)=0 and midpoint convexity on a sampled grid.

        A validation aid, not a proof; raises DomainError on violation.
        Results are cached so repeated bound evaluations stay cheap.
        """
        if self._validated:
            return
        if abs(float(self.psi(0.0))) > 1e-12:
            raise DomainError(f"{self.label}: psi(0) != 0")
        # psi'(0+) = 0 iff the secant slope psi(h)/h decays to 0 with h
        slopes = []
        for h in (1e-3, 1e-4, 1e-5, 1e-6):
            lam = min(h, self.lam_max())
            slopes.append(float(self.psi(lam)) / lam)
        for prev, nxt in zip(slopes, slopes[1:]):
            if nxt > 0.3 * abs(prev) + 1e-12:
                raise DomainError(f"{self.label}: psi'(0+) != 0 "
                                  f"(secant slopes {slopes} do not vanish)")
        hi = min(self.lam_max(), 16.0)
        grid = np.linspace(0.0, hi, grid_points)
        vals = np.array([float(self.psi(l)) for l in grid])
        mids = np.array([float(self.psi(l)) for l in 0.5 * (grid[:-1] + grid[1:])])
        if np.any(mids > 0.5 * (vals[:-1] + vals[1:]) + 1e-9 * (1 + np.abs(vals[:-1]))):
            raise DomainError(f"{self.label}: psi fails midpoint convexity on grid")
        self._validated.append(True)


@dataclass(frozen=True)
class SubGaussianBound:
    """Sub-Gaussian parameter R (same units as the loss)."""

    R: float

    def __post_init__(self):
        if not (self.R > 0):
            raise DomainError(f"sub-Gaussian parameter must be positive, got {self.R}")

    def cgf_bound(self):
        return sub_gaussian_cgf(self.R)


def sub_gaussian_cgf(R):
    """Quadratic CGF bound psi(lam) = R^2 lam^2 / 2 with inverse sqrt(2 R^2 y)."""
    if not (R > 0):
        raise DomainError(f"sub-Gaussian parameter must be positive, got {R}")
    R2 = float(R) * float(R)
    return CgfBound(
        psi=lambda lam: 0.5 * R2 * lam * lam,
        b=math.inf,
        inverse_kind=CLOSED_FORM,
        closed_inverse=lambda y: math.sqrt(2.0 * R2 * y),
        label=f"sub-gaussian(R={R})",
    )


def chi_squared_neg_cgf(d, sigma_l_sq):
    """Quadratic bound psi(lam) = d sigma^4 lam^2 dominating the negative-lambda
    branch of the scaled chi-squared CGF, with inverse 2 sqrt(d sigma^4 y).

    The exact CGF of the scaled chi-squared loss,
    Lambda(lam) = -d sigma^2 lam - (d/2) log(1 - 2 sigma^2 lam), is attached
    for validation; the bound dominates it through Lambda(-lam) <= psi(lam).
    """
    if d < 1 or int(d) != d:
        raise DomainError(f"dimension must be a positive integer, got {d}")
    if not (sigma_l_sq > 0):
        raise DomainError(f"variance scale must be positive, got {sigma_l_sq}")
    d = int(d)
    s2 = float(sigma_l_sq)
    coef = d * s2 * s2

    def exact(lam):
        lam = np.asarray(lam, dtype=float)
        if np.any(lam >= 1.0 / (2.0 * s2)):
            raise DomainError("exact chi-squared CGF needs lam < 1/(2 sigma^2)")
        return -d * s2 * lam - 0.5 * d * np.log1p(-2.0 * s2 * lam)

    return CgfBound(
        psi=lambda lam: coef * lam * lam,
        b=math.inf,
        inverse_kind=CLOSED_FORM,
        closed_inverse=lambda y: 2.0 * math.sqrt(coef * y),
        exact_cgf=exact,
        label=f"chi-squared-neg(d={d}, sigma_l_sq={sigma_l_sq})",
    )


def _numeric_dual_inverse(bound, y):
    """Minimize (y + psi(lam))/lam by golden-section search over log lam.

    The objective is unimodal on (0, b) for convex psi with psi(0)=psi'(0)=0,
    so a geometric bracket expansion from lam=1 followed by golden-section
    contraction is exact up to the stated tolerance.
    """
    psi = bound.psi
    hi_cap = bound.lam_max()

    def g(lam):
        return (y + float(psi(lam))) / lam

    lam0 = min(1.0, hi_cap)
    g0 = g(lam0)

    lo, g_lo = lam0, g0
    for _ in range(_BRACKET_BUDGET):
        nxt = lo / 2.0
        if nxt < 1e-300:
            break
        g_nxt = g(nxt)
        if g_nxt >= g_lo:
            break
        lo, g_lo = nxt, g_nxt
    else:
        raise NonConvergence("bracket expansion toward 0 exhausted its budget")

    hi, g_hi = lam0, g0
    for _ in range(_BRACKET_BUDGET):
        if hi >= hi_cap:
            break
        nxt = min(hi * 2.0, hi_cap)
        g_nxt = g(nxt)
        if g_nxt >= g_hi:
            break
        hi, g_hi = nxt, g_nxt
    else:
        raise NonConvergence(
            "objective kept decreasing while expanding lambda; psi does not "
            "grow superlinearly (malformed CGF bound)")

    # Golden section on t = log(lam); widen the bracket one notch so the
    # minimizer is interior.
    t_lo = math.log(max(lo / 2.0, 1e-300)) if lo > 1e-299 else math.log(lo)
    t_hi = math.log(min(hi * 2.0, hi_cap) if hi < hi_cap else hi_cap)
    best = min(g_lo, g_hi, g0)
    t1 = t_hi - _GOLDEN * (t_hi - t_lo)
    t2 = t_lo + _GOLDEN * (t_hi - t_lo)
    f1, f2 = g(math.exp(t1)), g(math.exp(t2))
    for _ in range(_BRACKET_BUDGET):
        if f1 <= f2:
            t_hi, t2, f2 = t2, t1, f1
            t1 = t_hi - _GOLDEN * (t_hi - t_lo)
            f1 = g(math.exp(t1))
        else:
            t_lo, t1, f1 = t1, t2, f2
            t2 = t_lo + _GOLDEN * (t_hi - t_lo)
            f2 = g(math.exp(t2))
        best = min(best, f1, f2)
        if t_hi - t_lo < _REL_TOL:
            return min(best, f1, f2)
    raise NonConvergence("golden-section search did not contract its bracket")


def legendre_dual_inverse(bound, y, method="auto"):
    """Inverse Legendre dual: inf over lam in (0, b) of (y + psi(lam))/lam.

    ``method`` selects "closed" (requires a closed form), "numeric", or
    "auto" (closed form when available).
    """
    if y < 0:
        raise DomainError(f"dual inverse argument must be nonnegative, got {y}")
    bound.validate()
    if y == 0:
        return 0.0
    use_closed = bound.inverse_kind == CLOSED_FORM and method in ("auto", "closed")
    if method == "closed" and bound.closed_inverse is None:
        raise DomainError("bound has no closed-form inverse")
    if use_closed:
        return float(bound.closed_inverse(y))
    return _numeric_dual_inverse(bound, float(y))
