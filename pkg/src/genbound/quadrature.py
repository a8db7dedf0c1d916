"""Composite adaptive Simpson quadrature with panel doubling.

The integrands in this package (phase densities, Rayleigh weights) are
smooth, so a plain composite Simpson rule that doubles its panel count
until two successive estimates agree is both simple and verifiable.
"""

import numpy as np

from .errors import NonConvergence

DEFAULT_TOL = 1e-7
MAX_DOUBLINGS = 16
INITIAL_PANELS = 64


def simpson_on_grid(values, h):
    """Composite Simpson estimate from values on an even-panel uniform grid."""
    n = len(values) - 1
    if n % 2 or n < 2:
        raise ValueError("Simpson rule needs an even number of panels >= 2")
    return (h / 3.0) * (values[0] + values[-1]
                        + 4.0 * values[1:-1:2].sum()
                        + 2.0 * values[2:-1:2].sum())


def integrate(f, a, b, tol=DEFAULT_TOL, initial_panels=INITIAL_PANELS,
              max_doublings=MAX_DOUBLINGS, vectorized=True):
    """Integrate ``f`` over [a, b], doubling panels until |I_new - I_old| < tol.

    ``f`` receives a numpy grid when ``vectorized`` (the default); otherwise
    it is called once per node.  Raises NonConvergence when the refinement
    budget is exhausted.
    """
    if b <= a:
        raise ValueError("integrate needs b > a")
    panels = initial_panels
    prev = None
    for _ in range(max_doublings + 1):
        grid = np.linspace(a, b, panels + 1)
        if vectorized:
            vals = np.asarray(f(grid), dtype=float)
        else:
            vals = np.array([float(f(x)) for x in grid])
        est = simpson_on_grid(vals, (b - a) / panels)
        if prev is not None and abs(est - prev) < tol:
            return est
        prev = est
        panels *= 2
    raise NonConvergence(
        f"Simpson refinement did not stabilize below {tol} within "
        f"{max_doublings} doublings (last estimate {prev})")
