"""
Crash data processing: CSV ingest, quarantine, selection and per-zone aggregation.
Handles raw exports through a ColumnMapping and canonical normalized files.
"""

from dataclasses import dataclass, field
from datetime import datetime
from io import StringIO
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
import pandas as pd

from ..config.constants import (
    CrashFlags,
    ErrorMessages,
    RECORD_COLUMNS,
    SuccessMessages,
    TIMESTAMP_FORMAT,
)
from ..config.mapping import ColumnMapping
from ..config.settings import AnalysisConfig
from ..geometry.assignment import UNASSIGNED, ZoneAssignment
from ..geometry.projection import GeoPoint
from .exceptions import ConfigurationError, DataError
from .helpers import ReproHelpers

logger = logging.getLogger(__name__)

CsvSource = Union[str, Path, StringIO]

QUARANTINE_COLUMNS = ["row", "reason"]
SEVERE_SELECTOR = "severe"
NEGATION_PREFIXES = ("not:", "!")


@dataclass(frozen=True)
class CrashRecord:
    """One collision event."""

    report_id: str
    timestamp: datetime
    location: GeoPoint
    severe: bool
    flags: FrozenSet[str] = field(default_factory=frozenset)


def records_to_frame(records: Iterable[CrashRecord]) -> pd.DataFrame:
    """Build the canonical record frame from CrashRecord objects."""
    rows = []
    for record in records:
        row = {
            "report_id": record.report_id,
            "timestamp": pd.Timestamp(record.timestamp),
            "lon": float(record.location.lon),
            "lat": float(record.location.lat),
            "severe": bool(record.severe),
        }
        row.update({name: name in record.flags for name in CrashFlags.get_all_types()})
        rows.append(row)
    return typed_frame(pd.DataFrame(rows, columns=RECORD_COLUMNS))


def frame_to_records(frame: pd.DataFrame) -> List[CrashRecord]:
    """Inverse of :func:`records_to_frame`."""
    flags = CrashFlags.get_all_types()
    return [
        CrashRecord(
            report_id=row.report_id,
            timestamp=row.timestamp.to_pydatetime(),
            location=GeoPoint(row.lon, row.lat),
            severe=bool(row.severe),
            flags=frozenset(name for name in flags if getattr(row, name)),
        )
        for row in frame.itertuples(index=False)
    ]


def typed_frame(frame: pd.DataFrame) -> pd.DataFrame:
    frame = frame.astype({"report_id": str, "lon": float, "lat": float, "severe": bool})
    frame["timestamp"] = pd.to_datetime(frame["timestamp"])
    for name in CrashFlags.get_all_types():
        frame[name] = frame[name].astype(bool)
    return frame.reset_index(drop=True)


def _selector_mask(records: pd.DataFrame, selector: str) -> pd.Series:
    name = selector.strip()
    negate = False
    for prefix in NEGATION_PREFIXES:
        if name.startswith(prefix):
            name, negate = name[len(prefix):].strip(), True
            break
    allowed = [SEVERE_SELECTOR] + CrashFlags.get_all_types()
    if name not in allowed:
        raise ConfigurationError(ErrorMessages.UNKNOWN_FLAG.value.format(name=selector, allowed=", ".join(allowed)))
    mask = records[name].astype(bool)
    return ~mask if negate else mask


def filter_crashes(records: pd.DataFrame, selector: str) -> pd.DataFrame:
    """
    Subset of records matching a flag or severity selector, in input order.

    Args:
        records: Canonical record frame
        selector: ``severe``, a flag name, or either prefixed with ``not:`` / ``!``

    Returns:
        Filtered frame (a copy)
    """
    return records[_selector_mask(records, selector)].copy()


def apply_selectors(records: pd.DataFrame, selectors: Sequence[str]) -> pd.DataFrame:
    """All selectors combined with AND."""
    mask = pd.Series(True, index=records.index)
    for selector in selectors:
        mask &= _selector_mask(records, selector)
    return records[mask].copy()


def aggregate_by_zone(
    records: pd.DataFrame, assignment: ZoneAssignment, zone_ids: Optional[Sequence[str]] = None
) -> pd.DataFrame:
    """
    Per-zone totals, severe counts and flag counts, including empty zones.

    Args:
        records: Canonical record frame
        assignment: Zone index per record
        zone_ids: Output zone order (defaults to the assignment's zones)

    Returns:
        Frame with columns zone_id, total, severe and one column per flag
    """
    if len(records) != len(assignment.indices):
        raise DataError(f"Assignment covers {len(assignment.indices)} records, expected {len(records)}")
    zone_ids = list(zone_ids) if zone_ids is not None else list(assignment.zone_ids)
    n_zones = len(assignment.zone_ids)
    indices = assignment.indices
    assigned = indices != UNASSIGNED

    counts = {"zone_id": list(assignment.zone_ids)}
    counts["total"] = np.bincount(indices[assigned], minlength=n_zones)
    for name in ["severe"] + CrashFlags.get_all_types():
        weights = records[name].to_numpy(dtype=bool)[assigned].astype(np.int64)
        counts[name] = np.bincount(indices[assigned], weights=weights, minlength=n_zones).astype(np.int64)
    table = pd.DataFrame(counts).set_index("zone_id").reindex(zone_ids, fill_value=0)
    return table.reset_index().astype({column: np.int64 for column in table.columns})


def flag_shares(records: pd.DataFrame) -> pd.DataFrame:
    """Count and share of all records for severity and every flag."""
    n = len(records)
    rows = []
    for name in [SEVERE_SELECTOR] + CrashFlags.get_all_types():
        count = int(records[name].sum()) if n else 0
        rows.append({"name": name, "count": count, "share": count / n if n else 0.0})
    return pd.DataFrame(rows, columns=["name", "count", "share"])


class CrashDataProcessor:
    """
    Crash ingest processor.
    Parses raw exports through a column mapping, quarantining rows it cannot use.
    """

    def __init__(self, mapping: Optional[ColumnMapping] = None, config: Optional[AnalysisConfig] = None):
        """Initialize processor with mapping, configuration and empty state."""
        self.mapping = mapping or ColumnMapping.default()
        self.config = config or AnalysisConfig.from_env()
        self.records: Optional[pd.DataFrame] = None
        self.quarantine: pd.DataFrame = pd.DataFrame(columns=QUARANTINE_COLUMNS)
        self.raw_row_count = 0

    def load_crashes(self, source: CsvSource) -> Tuple[pd.DataFrame, pd.DataFrame]:
        """
        Load and normalize a raw collision CSV.

        Args:
            source: Path or text buffer of an RFC-4180 UTF-8 CSV with a header row

        Returns:
            (records frame, quarantine frame with row and reason)
        """
        text_source = self._reopenable(source)
        header = pd.read_csv(text_source(), nrows=0, dtype=str, encoding="utf-8").columns
        missing = self.mapping.missing_columns(header)
        if missing:
            raise ConfigurationError(ErrorMessages.MISSING_COLUMNS.value.format(columns=", ".join(missing)))

        reader = pd.read_csv(
            text_source(),
            dtype=str,
            keep_default_na=False,
            usecols=self.mapping.required_columns(),
            chunksize=self.config.CSV_CHUNK_ROWS,
            encoding="utf-8",
        )
        chunks = []
        offset = 0
        for chunk in reader:
            chunks.append((offset, chunk))
            offset += len(chunk)
        self.raw_row_count = offset

        parsed = ReproHelpers.parallel_map(lambda item: self._parse_chunk(*item), chunks, self.config.WORKERS)
        if parsed:
            records = pd.concat([part[0] for part in parsed], ignore_index=True)
            quarantine = pd.concat([part[1] for part in parsed], ignore_index=True)
        else:
            records = typed_frame(pd.DataFrame(columns=RECORD_COLUMNS))
            quarantine = pd.DataFrame(columns=QUARANTINE_COLUMNS)

        self.records = records
        self.quarantine = quarantine.sort_values("row", kind="stable").reset_index(drop=True)
        logger.info(SuccessMessages.DATA_LOADED.value.format(count=len(records), quarantined=len(self.quarantine)))
        if len(self.quarantine):
            logger.warning(f"Quarantined rows by reason: {self.quarantine['reason'].value_counts().to_dict()}")
        return self.records, self.quarantine

    @staticmethod
    def _reopenable(source: CsvSource):
        if isinstance(source, (str, Path)):
            path = Path(source)
            if not path.exists():
                raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=path))
            return lambda: path
        text = source.read()
        return lambda: StringIO(text)

    def _parse_chunk(self, offset: int, chunk: pd.DataFrame) -> Tuple[pd.DataFrame, pd.DataFrame]:
        """Parse one chunk; row numbers are 1-based data rows."""
        m = self.mapping
        rows = np.arange(offset + 1, offset + len(chunk) + 1)
        chunk = chunk.reset_index(drop=True)
        reason = pd.Series("", index=chunk.index, dtype=object)

        def flag(mask: pd.Series, text: str) -> None:
            reason.loc[mask & (reason == "")] = text

        report_id = chunk[m.report_id].str.strip()
        flag(report_id == "", "missing report id")

        lon_raw, lat_raw = chunk[m.longitude].str.strip(), chunk[m.latitude].str.strip()
        flag((lon_raw == "") | (lat_raw == ""), "missing coordinate")
        lon = pd.to_numeric(lon_raw, errors="coerce")
        lat = pd.to_numeric(lat_raw, errors="coerce")
        flag(~(np.isfinite(lon) & np.isfinite(lat)), "invalid coordinate")

        stamp_raw = chunk[m.timestamp].str.strip()
        flag(stamp_raw == "", "missing timestamp")
        stamp = pd.to_datetime(stamp_raw, format=m.timestamp_format or "ISO8601", errors="coerce")
        flag(stamp.isna(), "invalid timestamp")

        c = self.config
        in_box = (lon >= c.MIN_LON) & (lon <= c.MAX_LON) & (lat >= c.MIN_LAT) & (lat <= c.MAX_LAT)
        flag(~in_box, "outside bounding box")
        start, end = c.window
        flag(~((stamp >= pd.Timestamp(start)) & (stamp <= pd.Timestamp(end))), "outside study window")

        keep = reason == ""
        records = pd.DataFrame(
            {
                "report_id": report_id[keep],
                "timestamp": stamp[keep],
                "lon": lon[keep],
                "lat": lat[keep],
                "severe": m.match_severe(chunk.loc[keep, m.severity]),
            }
        )
        for name in CrashFlags.get_all_types():
            records[name] = m.match_flag(name, chunk.loc[keep, m.flag_columns[name]])
        quarantine = pd.DataFrame({"row": rows[~keep.to_numpy()], "reason": reason[~keep].to_numpy()})
        return typed_frame(records[RECORD_COLUMNS]), quarantine

    def get_data_summary(self) -> Dict[str, object]:
        """Counts needed for the conservation check and run logs."""
        quarantined = len(self.quarantine)
        return {
            "raw_rows": self.raw_row_count,
            "records": 0 if self.records is None else len(self.records),
            "quarantined": quarantined,
            "quarantine_reasons": self.quarantine["reason"].value_counts().sort_index().to_dict() if quarantined else {},
        }

    @staticmethod
    def write_normalized(records: pd.DataFrame, path: Path) -> Path:
        """Write the canonical columnar CSV."""
        out = pd.DataFrame({"report_id": records["report_id"].astype(str)})
        out["timestamp"] = records["timestamp"].dt.strftime(TIMESTAMP_FORMAT)
        out["lon"] = records["lon"].map(lambda v: f"{v:.7f}")
        out["lat"] = records["lat"].map(lambda v: f"{v:.7f}")
        for name in ["severe"] + CrashFlags.get_all_types():
            out[name] = records[name].astype(bool).astype(int).astype(str)
        return ReproHelpers.write_text(path, out[RECORD_COLUMNS].to_csv(index=False, lineterminator="\n"))

    @staticmethod
    def write_quarantine(quarantine: pd.DataFrame, path: Path) -> Path:
        """Write the quarantine report ordered by row number."""
        ordered = quarantine.sort_values("row", kind="stable")[QUARANTINE_COLUMNS]
        return ReproHelpers.write_text(path, ordered.to_csv(index=False, lineterminator="\n"))

    @staticmethod
    def read_normalized(path: Path) -> pd.DataFrame:
        """Read a canonical CSV written by :meth:`write_normalized`."""
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=path))
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
        missing = [column for column in RECORD_COLUMNS if column not in frame.columns]
        if missing:
            raise ConfigurationError(ErrorMessages.MISSING_COLUMNS.value.format(columns=", ".join(missing)))
        frame["timestamp"] = pd.to_datetime(frame["timestamp"], format=TIMESTAMP_FORMAT)
        for name in ["severe"] + CrashFlags.get_all_types():
            frame[name] = frame[name].astype(int).astype(bool)
        return typed_frame(frame[RECORD_COLUMNS])
