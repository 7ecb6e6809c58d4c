"""
Exception hierarchy for the crash hotspot engine.
Each error class carries the process exit code the command-line front-end returns.
"""

from ..config.constants import ExitCodes


class HotspotError(Exception):
    """Base class for all expected failures."""

    exit_code: int = ExitCodes.UNEXPECTED


class ConfigurationError(HotspotError):
    """Invalid configuration, mapping, parameter or path."""

    exit_code = ExitCodes.CONFIGURATION


class DataError(HotspotError):
    """Input data that cannot be processed."""

    exit_code = ExitCodes.DATA


class DegeneracyError(HotspotError):
    """Statistic undefined for the given input (e.g. zero variance)."""

    exit_code = ExitCodes.DEGENERACY


class CoordinateError(DataError):
    """Non-finite or out-of-range coordinate."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class StructuralError(DataError):
    """Degenerate polygon ring or zero-area polygon."""


class DomainError(DataError):
    """Counts that violate 0 <= severe <= total."""


class SizingError(ConfigurationError):
    """Sizes that cannot be honoured, such as k >= n or an oversized raster."""


class OutputError(ConfigurationError):
    """Destination that cannot be written."""
