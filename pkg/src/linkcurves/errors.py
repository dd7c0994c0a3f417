"""Exception types raised across the package."""


class LinkCurvesError(Exception):
    """Base class for all package errors."""


class InvalidArgument(LinkCurvesError, ValueError):
    pass


class NumericalDegeneracy(LinkCurvesError, ArithmeticError):
    """A computation hit a singular or non-finite intermediate."""


class UnsupportedTopology(LinkCurvesError, ValueError):
    pass


class UnsupportedFormat(LinkCurvesError, ValueError):
    pass


class TouchstoneParseError(LinkCurvesError, ValueError):
    """Malformed Touchstone content. ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ConfigError(LinkCurvesError, ValueError):
    pass
