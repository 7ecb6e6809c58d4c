"""
Column mapping between raw collision exports and canonical crash records.
The mapping lives in YAML so upstream schema changes never require code changes.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional
import logging

import pandas as pd
import yaml

from .constants import CrashFlags, ErrorMessages
from ..utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_MAPPING_PATH = Path(__file__).with_name("default_mapping.yaml")


class _UniqueKeyLoader(yaml.SafeLoader):
    """SafeLoader that rejects duplicate mapping keys."""

    def construct_mapping(self, node, deep=False):
        seen = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=deep)
            if key in seen:
                raise ConfigurationError(ErrorMessages.DUPLICATE_FIELD.value.format(field=key))
            seen.add(key)
        return super().construct_mapping(node, deep=deep)


def _normalize_values(values: Iterable[Any]) -> FrozenSet[str]:
    return frozenset(str(value).strip().upper() for value in values)


@dataclass(frozen=True)
class ColumnMapping:
    """
    Source column per logical field plus the value dictionaries for
    severity and circumstance flags.
    """

    report_id: str
    timestamp: str
    longitude: str
    latitude: str
    severity: str
    severe_values: FrozenSet[str]
    flag_columns: Dict[str, str] = field(default_factory=dict)
    flag_values: Dict[str, FrozenSet[str]] = field(default_factory=dict)
    timestamp_format: Optional[str] = None

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "ColumnMapping":
        """
        Build a mapping from a parsed YAML document.

        Args:
            document: Mapping document (see default_mapping.yaml)

        Returns:
            Validated ColumnMapping
        """
        required = ["report_id", "timestamp", "longitude", "latitude", "severity", "flags"]
        missing = [name for name in required if name not in document]
        if missing:
            raise ConfigurationError(ErrorMessages.UNMAPPED_FIELDS.value.format(fields=", ".join(missing)))

        timestamp = document["timestamp"]
        if isinstance(timestamp, dict):
            timestamp_column = timestamp.get("column")
            timestamp_format = timestamp.get("format")
        else:
            timestamp_column, timestamp_format = timestamp, None

        severity = document["severity"]
        if not isinstance(severity, dict) or "column" not in severity or "values" not in severity:
            raise ConfigurationError("severity must define 'column' and 'values'")

        flags = document["flags"] or {}
        allowed = CrashFlags.get_all_types()
        unknown = sorted(set(flags) - set(allowed))
        if unknown:
            raise ConfigurationError(
                ErrorMessages.UNKNOWN_FLAG.value.format(name=", ".join(unknown), allowed=", ".join(allowed))
            )
        unmapped = [name for name in allowed if name not in flags]
        if unmapped:
            raise ConfigurationError(ErrorMessages.UNMAPPED_FIELDS.value.format(fields=", ".join(unmapped)))

        flag_columns = {}
        flag_values = {}
        for name in allowed:
            spec = flags[name]
            if not isinstance(spec, dict) or "column" not in spec:
                raise ConfigurationError(f"flag {name} must define 'column' and 'values'")
            flag_columns[name] = str(spec["column"])
            flag_values[name] = _normalize_values(spec.get("values") or [])

        return cls(
            report_id=str(document["report_id"]),
            timestamp=str(timestamp_column),
            longitude=str(document["longitude"]),
            latitude=str(document["latitude"]),
            severity=str(severity["column"]),
            severe_values=_normalize_values(severity["values"]),
            flag_columns=flag_columns,
            flag_values=flag_values,
            timestamp_format=timestamp_format,
        )

    @classmethod
    def from_yaml(cls, path: Path) -> "ColumnMapping":
        """Load a mapping file; a top-level ``mapping`` key is honoured for combined config files."""
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=path))
        document = yaml.load(path.read_text(encoding="utf-8"), Loader=_UniqueKeyLoader) or {}
        if "mapping" in document:
            document = document["mapping"]
        return cls.from_dict(document)

    @classmethod
    def default(cls) -> "ColumnMapping":
        """Montgomery County ACRS export defaults."""
        return cls.from_yaml(DEFAULT_MAPPING_PATH)

    def required_columns(self) -> List[str]:
        """Distinct source columns in first-use order."""
        columns = [self.report_id, self.timestamp, self.longitude, self.latitude, self.severity]
        columns.extend(self.flag_columns[name] for name in CrashFlags.get_all_types())
        return list(dict.fromkeys(columns))

    def missing_columns(self, header: Iterable[str]) -> List[str]:
        """Mapped columns absent from a CSV header."""
        present = set(header)
        return [column for column in self.required_columns() if column not in present]

    def match_severe(self, raw: pd.Series) -> pd.Series:
        """Vectorized severity lookup."""
        return raw.fillna("").astype(str).str.strip().str.upper().isin(self.severe_values)

    def match_flag(self, name: str, raw: pd.Series) -> pd.Series:
        """Vectorized flag lookup for one circumstance flag."""
        return raw.fillna("").astype(str).str.strip().str.upper().isin(self.flag_values[name])
