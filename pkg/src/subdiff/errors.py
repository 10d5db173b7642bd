"""Exception types shared across the package."""


class SubdiffError(Exception):
    """Base class for all package errors."""


class DomainError(SubdiffError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class SingularityError(DomainError):
    """Evaluation requested at or too close to a pole of the integrand."""


class ConvergenceError(SubdiffError, RuntimeError):
    """No evaluation strategy reached the requested tolerance."""


class BudgetError(SubdiffError, RuntimeError):
    """An iteration or step budget was exhausted before completion."""


class CoverageError(SubdiffError, ValueError):
    """A simulated path does not extend far enough for the requested query."""


class GridMismatchError(SubdiffError, ValueError):
    """Trajectories passed to an aggregator do not share a common time grid."""


class FitError(SubdiffError, ValueError):
    """A power-law fit window is unusable (too few points or bad values)."""


class ConfigError(SubdiffError, ValueError):
    """Invalid command-line or config-file input."""
