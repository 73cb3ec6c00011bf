"""Exception hierarchy shared across the package."""


class LojexpError(Exception):
    """Base class for all package-specific errors."""


class InputError(LojexpError, ValueError):
    """Malformed or out-of-contract user input."""


class ParseError(InputError):
    """Syntax error in a polynomial, series, or curve literal.

    `pos` is a 0-based character offset into the source text.
    """

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class CurveError(InputError):
    """Curve fails a structural requirement (e.g. it does not escape to infinity)."""


class DimensionError(LojexpError, ValueError):
    """Mismatched variable counts between a polynomial and a point or curve."""


class NumericError(LojexpError, RuntimeError):
    """Numeric routine could not produce a trustworthy result."""
