"""
Parameter validation utilities for the crash hotspot engine.
Collects every range violation before failing so one run reports all problems.
"""

from typing import Any, List
import logging

from ..config.constants import ErrorMessages
from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)


class ParameterValidator:
    """
    Validation class for analysis parameters.
    Accumulates errors and warnings, then raises once with the full list.
    """

    def __init__(self):
        """Initialize validator with empty error and warning lists."""
        self.validation_errors: List[str] = []
        self.validation_warnings: List[str] = []

    def check_range(self, name: str, value: Any, low: float, high: float, allowed: str) -> bool:
        """
        Record an error when ``value`` falls outside ``[low, high]``.

        Args:
            name: Parameter name for the message
            value: Value to check
            low: Inclusive lower bound
            high: Inclusive upper bound
            allowed: Human-readable allowed range

        Returns:
            bool: True if valid
        """
        try:
            ok = low <= float(value) <= high
        except (TypeError, ValueError):
            ok = False
        if not ok:
            self.validation_errors.append(
                ErrorMessages.PARAMETER_RANGE.value.format(name=name, value=value, allowed=allowed)
            )
        return ok

    def check_analysis(self, config) -> None:
        """Check every analysis parameter against its documented range."""
        self.check_range("k_neighbors", config.K_NEIGHBORS, 1, float("inf"), "[1, inf)")
        self.check_range("permutations", config.PERMUTATIONS, 99, float("inf"), "[99, inf)")
        if config.ALPHA is None or not (0.0 < float(config.ALPHA) <= 1.0):
            self.validation_errors.append(
                ErrorMessages.PARAMETER_RANGE.value.format(name="alpha", value=config.ALPHA, allowed="(0, 1]")
            )
        self.check_range("workers", config.WORKERS, 1, 1024, "[1, 1024]")
        self.check_range("cell_size", config.CELL_SIZE, 1e-9, float("inf"), "(0, inf)")
        self.check_range("cutoff_bandwidths", config.CUTOFF_BANDWIDTHS, 1e-9, float("inf"), "(0, inf)")
        if config.BANDWIDTH is not None:
            self.check_range("bandwidth", config.BANDWIDTH, 1e-9, float("inf"), "(0, inf)")
        self.check_range("min_lon", config.MIN_LON, -180, 180, "[-180, 180]")
        self.check_range("max_lon", config.MAX_LON, -180, 180, "[-180, 180]")
        self.check_range("min_lat", config.MIN_LAT, -90, 90, "[-90, 90]")
        self.check_range("max_lat", config.MAX_LAT, -90, 90, "[-90, 90]")
        if config.MIN_LON >= config.MAX_LON or config.MIN_LAT >= config.MAX_LAT:
            self.validation_errors.append("Bounding box minimum must be below maximum")
        if config.KERNEL != "gaussian":
            self.validation_errors.append(
                ErrorMessages.PARAMETER_RANGE.value.format(name="kernel", value=config.KERNEL, allowed="{gaussian}")
            )
        start, end = config.window
        if start > end:
            self.validation_errors.append("Study window start is after its end")
        if config.FDR and config.ALPHA >= 1.0:
            self.validation_warnings.append("FDR control has no effect with alpha = 1")

    def raise_if_invalid(self) -> None:
        """Raise ConfigurationError listing every collected error."""
        for warning in self.validation_warnings:
            logger.warning(warning)
        if self.validation_errors:
            raise ConfigurationError("; ".join(self.validation_errors))

    @classmethod
    def validate_analysis(cls, config) -> None:
        """Validate an AnalysisConfig, raising on the first failing run."""
        validator = cls()
        validator.check_analysis(config)
        validator.raise_if_invalid()
