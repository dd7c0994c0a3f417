"""Link performance curves from foundational stripline and via models."""

from .errors import (
    ConfigError,
    InvalidArgument,
    LinkCurvesError,
    NumericalDegeneracy,
    TouchstoneParseError,
    UnsupportedFormat,
    UnsupportedTopology,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "InvalidArgument",
    "LinkCurvesError",
    "NumericalDegeneracy",
    "TouchstoneParseError",
    "UnsupportedFormat",
    "UnsupportedTopology",
]
