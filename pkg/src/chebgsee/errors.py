"""Exception types shared across the package.

The CLI maps these onto exit codes: validation-type errors (structure,
parameters, file format) exit with 2, capacity errors with 3, and
numerical failures with 4.
"""


class ChebGseeError(Exception):
    """Base class for all package errors."""


class StructuralError(ChebGseeError, ValueError):
    """Tensor chains are incompatible (site counts, bond adjacency, shapes)."""


class ParameterError(ChebGseeError, ValueError):
    """An argument is outside its documented domain."""


class CapacityError(ChebGseeError, RuntimeError):
    """A requested computation exceeds a configured size budget."""


class NumericalError(ChebGseeError, RuntimeError):
    """A numerically ill-posed problem was detected."""


class ThresholdNotBracketedError(NumericalError):
    """The cumulative function never crosses the decision threshold.

    Raised when every scanned C(x) lies on one side of chi^2/2, i.e. the
    ground state is outside the scanned window.
    """


class FormatError(ChebGseeError, ValueError):
    """A binary container is malformed.

    ``offset`` is the byte position at which the problem was detected.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


def exit_code_for(exc: BaseException) -> int:
    """Exit code the CLI uses for a package exception."""
    if isinstance(exc, CapacityError):
        return 3
    if isinstance(exc, NumericalError):
        return 4
    if isinstance(exc, (StructuralError, ParameterError, FormatError)):
        return 2
    return 1
