"""Exception types shared across the package.

The CLI maps these onto exit codes: ParseError -> 2, TooLargeError -> 3,
PreconditionError -> 4, anything else -> 1.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """A constructed object violates one of its invariants.

    Carries the name of the violated invariant and the measured residual so
    callers can report exactly what failed.
    """

    def __init__(self, invariant: str, residual: float | None = None, detail: str = ""):
        self.invariant = invariant
        self.residual = residual
        msg = f"invariant violated: {invariant}"
        if residual is not None:
            msg += f" (residual {residual:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NotPsdError(ValidationError):
    """An operator required to be positive semidefinite is not.

    ``residual`` holds the offending (most negative) eigenvalue.
    """

    def __init__(self, eigenvalue: float, detail: str = ""):
        super().__init__("positive semidefinite", residual=eigenvalue, detail=detail)
        self.eigenvalue = eigenvalue


class PreconditionError(ValueError):
    """An operation's stated precondition does not hold for the given inputs."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NumericError(RuntimeError):
    """A numerical routine failed to reach its accuracy contract."""

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message += f" (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class TooLargeError(ValueError):
    """A resource cap (enumeration size, tensor size) would be exceeded."""


class ParseError(ValueError):
    """A text file could not be parsed; ``line`` is the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
