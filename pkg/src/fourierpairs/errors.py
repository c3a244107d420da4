"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: invalid input -> 2,
numerical failure -> 3, I/O problems (plain OSError) -> 4.
"""


class FourierPairsError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(FourierPairsError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class ResourceLimitError(InvalidInputError):
    """A request exceeds a documented size bound (e.g. dense 2D solves)."""


class NumericalError(FourierPairsError, ArithmeticError):
    """A numerical routine failed beyond its recovery options."""
