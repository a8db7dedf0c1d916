"""Exception types shared across the package."""


class GenboundError(Exception):
    """Base class for all package errors."""


class DomainError(GenboundError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class NonConvergence(GenboundError, RuntimeError):
    """An iterative routine exhausted its budget without stabilizing."""


class NonNormalized(GenboundError, ValueError):
    """A density does not integrate to 1 within the allowed slack."""


class PreconditionError(GenboundError, ValueError):
    """A structural precondition (e.g. product marginal) is violated."""


class DegenerateCloud(GenboundError, ValueError):
    """Sample cloud too degenerate for neighborhood counting."""
