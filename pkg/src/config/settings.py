"""
Analysis configuration settings and defaults.
Centralized configuration management with environment, YAML file and flag layers.
"""

from dataclasses import dataclass, field, fields, replace
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import logging
import os

import yaml

from .constants import DEFAULT_ZONE_ID_PROPERTY, ErrorMessages
from ..utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


def parse_window(start: str, end: str) -> Tuple[datetime, datetime]:
    """
    Parse an inclusive ISO-8601 study window.

    A date-only end (``2020-12-31``) covers that whole day.

    Raises:
        ConfigurationError: either bound is not ISO-8601
    """
    try:
        first, last = datetime.fromisoformat(start), datetime.fromisoformat(end)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(
            ErrorMessages.PARAMETER_RANGE.value.format(
                name="window", value=f"{start}..{end}", allowed="ISO-8601 datetimes"
            )
        ) from e
    if len(end.strip()) == 10:
        last = last + timedelta(days=1) - timedelta(microseconds=1)
    return first, last


@dataclass
class AnalysisConfig:
    """
    Configuration class for analysis parameters.
    Manages study area, statistical, raster and performance settings.
    """

    # Study area settings (Montgomery County, Maryland)
    MIN_LON: float = -77.53
    MAX_LON: float = -76.88
    MIN_LAT: float = 38.93
    MAX_LAT: float = 39.36
    REFERENCE_LON: Optional[float] = None
    REFERENCE_LAT: Optional[float] = None
    WINDOW_START: str = "2015-01-01T00:00:00"
    WINDOW_END: str = "2024-12-31T23:59:59"
    ZONE_ID_PROPERTY: str = DEFAULT_ZONE_ID_PROPERTY

    # Statistical settings
    K_NEIGHBORS: int = 10
    PERMUTATIONS: int = 999
    ALPHA: float = 0.05
    SEED: int = 20240101
    ROW_STANDARDIZE: bool = True
    SYMMETRIZE: bool = False
    FDR: bool = False

    # Kernel density settings
    BANDWIDTH: Optional[float] = None
    KERNEL: str = "gaussian"
    CUTOFF_BANDWIDTHS: float = 6.0
    CELL_SIZE: float = 100.0
    MAX_GRID_CELLS: int = 4_000_000
    GRID: Optional[Dict[str, float]] = None  # None means "auto"

    # Performance settings
    WORKERS: int = 1
    CSV_CHUNK_ROWS: int = 50_000
    LOG_LEVEL: str = "INFO"

    @property
    def reference(self) -> Tuple[float, float]:
        """Projection reference point; defaults to the bounding-box centre."""
        lon = self.REFERENCE_LON if self.REFERENCE_LON is not None else (self.MIN_LON + self.MAX_LON) / 2
        lat = self.REFERENCE_LAT if self.REFERENCE_LAT is not None else (self.MIN_LAT + self.MAX_LAT) / 2
        return lon, lat

    @property
    def window(self) -> Tuple[datetime, datetime]:
        """Study window as parsed datetimes, end inclusive."""
        return parse_window(self.WINDOW_START, self.WINDOW_END)

    def as_dict(self) -> Dict[str, Any]:
        """Lower-case key view used for metadata stamping."""
        return {f.name.lower(): getattr(self, f.name) for f in fields(self)}

    def merged(self, overrides: Dict[str, Any]) -> "AnalysisConfig":
        """
        Return a copy with overrides applied.

        Args:
            overrides: Lower- or upper-case field names; ``None`` values are skipped

        Returns:
            New configuration instance
        """
        known = {f.name for f in fields(self)}
        updates = {}
        unknown = []
        for key, value in overrides.items():
            name = key.upper()
            if name not in known:
                unknown.append(key)
            elif value is not None:
                updates[name] = value
        if unknown:
            raise ConfigurationError(ErrorMessages.UNKNOWN_CONFIG_KEY.value.format(keys=", ".join(sorted(unknown))))
        return replace(self, **updates)

    @classmethod
    def from_env(cls) -> "AnalysisConfig":
        """Load configuration from environment variables."""
        config = cls()

        # Environment supplies the default worker count and log level only
        if os.getenv("HOTSPOT_WORKERS"):
            try:
                config.WORKERS = int(os.getenv("HOTSPOT_WORKERS"))
            except ValueError:
                logger.warning(f"Ignoring non-integer HOTSPOT_WORKERS={os.getenv('HOTSPOT_WORKERS')!r}")

        if os.getenv("HOTSPOT_LOG_LEVEL"):
            config.LOG_LEVEL = os.getenv("HOTSPOT_LOG_LEVEL").upper()

        return config

    @classmethod
    def from_file(cls, path: Path, base: Optional["AnalysisConfig"] = None) -> "AnalysisConfig":
        """
        Layer a YAML configuration file over a base configuration.

        Args:
            path: YAML file with lower-case field names as keys
            base: Configuration to layer onto (defaults plus environment if omitted)

        Returns:
            Merged configuration
        """
        base = base or cls.from_env()
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=path))
        document = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        if not isinstance(document, dict):
            raise ConfigurationError(f"Configuration file {path} must contain a mapping")
        # The mapping section is owned by ColumnMapping
        document.pop("mapping", None)
        # YAML reads unquoted dates as date objects
        document = {
            key: value.isoformat() if isinstance(value, (date, datetime)) else value for key, value in document.items()
        }
        return base.merged(document)


@dataclass
class RunConfig:
    """
    Everything one subcommand run needs: paths, parameters and selections.
    Precedence is flags > file > defaults.
    """

    analysis: AnalysisConfig = field(default_factory=AnalysisConfig.from_env)
    crashes_path: Optional[Path] = None
    counts_path: Optional[Path] = None
    zones_path: Optional[Path] = None
    output_dir: Path = Path("output")
    mapping_path: Optional[Path] = None
    config_path: Optional[Path] = None
    selectors: List[str] = field(default_factory=list)
    variable: str = "total"
    raster_pgm: bool = False
    charts: bool = False
    command: str = ""

    @classmethod
    def build(
        cls,
        command: str,
        config_path: Optional[Path] = None,
        overrides: Optional[Dict[str, Any]] = None,
        **paths: Any,
    ) -> "RunConfig":
        """
        Build a run configuration from an optional file plus CLI flag overrides.

        Args:
            command: Subcommand name
            config_path: Optional YAML configuration file
            overrides: Analysis parameters given as flags
            **paths: Path and selection fields of RunConfig

        Returns:
            RunConfig instance (not yet validated)
        """
        analysis = AnalysisConfig.from_env()
        if config_path is not None:
            analysis = AnalysisConfig.from_file(config_path, base=analysis)
        if overrides:
            analysis = analysis.merged(overrides)
        values = {key: value for key, value in paths.items() if value is not None}
        for key in ("crashes_path", "counts_path", "zones_path", "output_dir", "mapping_path"):
            if key in values:
                values[key] = Path(values[key])
        return cls(analysis=analysis, config_path=config_path, command=command, **values)

    def validate(self, require: Tuple[str, ...] = ()) -> "RunConfig":
        """
        Check referenced files exist and parameters are within documented ranges.

        Args:
            require: Names of path fields that must be set and exist

        Returns:
            self, for chaining
        """
        from ..utils.validators import ParameterValidator

        for name in require:
            path = getattr(self, name)
            if path is None or not Path(path).exists():
                raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=path))
        if self.mapping_path is not None and not self.mapping_path.exists():
            raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=self.mapping_path))
        ParameterValidator.validate_analysis(self.analysis)
        return self


# Global configuration instance
config = AnalysisConfig.from_env()
