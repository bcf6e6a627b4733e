"""Exceptions raised by the colorful vector balancing pipeline.

Every domain error carries the process exit code the CLI uses when the error
escapes a subcommand.
"""


class BalancingError(Exception):
    """Base class for all domain errors of the package."""

    exit_code = 1


class InvalidInstanceError(BalancingError):
    """Raised when an instance violates its structural or unit-ball invariants."""

    exit_code = 5


class InfeasibleError(BalancingError):
    """Raised when 0 is not in the Minkowski sum of the family convex hulls."""

    exit_code = 2


class NumericallyDegenerateError(BalancingError):
    """Raised when simplex pivoting stalls beyond its degenerate-pivot budget."""

    exit_code = 6


class NotAVertexError(BalancingError):
    """Raised when a coefficient vector fails the vertex bounds k <= d, |F| <= k + d."""

    exit_code = 7


class RestartsExhaustedError(BalancingError):
    """Raised when no walk run met its post-conditions within the restart budget."""

    exit_code = 3


class PreconditionViolatedError(BalancingError):
    """Raised when a skeleton round is called on families it cannot handle."""

    exit_code = 8


class AmbiguousFamilyError(BalancingError):
    """Raised when snapping finds zero or several coordinates above delta in a family."""

    exit_code = 9


class BudgetExceededError(BalancingError):
    """Raised when an exhaustive enumeration would exceed its size budget."""

    exit_code = 10


class InvariantViolationError(BalancingError, AssertionError):
    """Raised when a runtime-checked mathematical guarantee does not hold."""

    exit_code = 11


class BoundViolatedError(BalancingError):
    """Raised when a final selection exceeds the theorem bound it must meet."""

    exit_code = 4
