"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to.
"""

from __future__ import annotations


class UltradiffError(Exception):
    exit_code = 1


class DomainError(UltradiffError, ValueError):
    """Input outside the domain of an operation."""

    exit_code = 3


class PrecisionError(DomainError):
    """Finite-difference stencil too noisy for the requested order."""


class NotADiffeomorphismError(DomainError):
    """Monotonicity witness ``inf(1 + f')`` is not positive."""


class BracketError(DomainError):
    """Root bracketing failed; the grid must be refined."""


class StiffnessError(DomainError):
    """Time step underflow while integrating a vector field."""


class StepError(DomainError):
    """Time step violates the CFL restriction."""


class WindowError(DomainError):
    """Tail outside the window too large for the requested accuracy."""


class ConstraintError(DomainError):
    """Precondition residual above tolerance."""


class InvariantError(UltradiffError, AssertionError):
    """A guaranteed invariant failed; signals a numerical or logic bug."""

    exit_code = 2

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
