"""
Synthetic collision fixtures with planted hotspots.

A g x g lattice of square zones (or user-supplied zones) receives Poisson
event counts, uniform locations and per-stratum severity, all drawn from
one counter-based substream per zone. Fixtures are written in the same raw
CSV and GeoJSON formats the ingest and geometry stages read.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from ..config.constants import CrashFlags, ErrorMessages, RECORD_COLUMNS, RandomStreams
from ..config.mapping import ColumnMapping
from ..config.settings import AnalysisConfig, parse_window
from ..geometry.geojson import zones_to_geojson
from ..geometry.polygons import ZonePolygon, distinct_zone_ids, points_in_polygon
from ..geometry.projection import unproject
from ..utils.data_processor import typed_frame
from ..utils.exceptions import ConfigurationError
from ..utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

# Keeps sampled points off zone edges so 7-decimal coordinates stay in their cell
EDGE_MARGIN = 1e-3
REJECTION_BATCH = 256
RAW_TIMESTAMP_FORMAT = "%m/%d/%Y %I:%M:%S %p"

# Background share of each circumstance flag
FLAG_PROBABILITIES: Dict[str, float] = {
    CrashFlags.PEDESTRIAN.value: 0.04,
    CrashFlags.ALCOHOL.value: 0.03,
    CrashFlags.ANIMAL.value: 0.02,
    CrashFlags.PARKED_VEHICLE.value: 0.05,
    CrashFlags.DISTRACTED.value: 0.20,
    CrashFlags.OFF_ROAD.value: 0.08,
    CrashFlags.POOR_LIGHTING.value: 0.10,
    CrashFlags.NO_TRAFFIC_CONTROL.value: 0.43,
    CrashFlags.FIXED_OBJECT.value: 0.10,
}

# Flags stored in the same raw column of the default export
FLAG_GROUPS: List[Tuple[str, ...]] = [
    (CrashFlags.PEDESTRIAN.value, CrashFlags.ANIMAL.value),
    (CrashFlags.ALCOHOL.value,),
    (CrashFlags.PARKED_VEHICLE.value,),
    (CrashFlags.DISTRACTED.value,),
    (CrashFlags.OFF_ROAD.value,),
    (CrashFlags.POOR_LIGHTING.value,),
    (CrashFlags.NO_TRAFFIC_CONTROL.value,),
    (CrashFlags.FIXED_OBJECT.value,),
]

_DEFAULTS = AnalysisConfig()


@dataclass(frozen=True)
class SynthSpec:
    """
    Parameters of a synthetic fixture.

    Zone index ``row * grid + col`` counts from the south-west corner.
    """

    grid: int = 10
    cell_size: float = 1000.0
    base_intensity: float = 50.0
    hotspot_zones: FrozenSet[int] = frozenset()
    hotspot_multiplier: float = 1.0
    severe_probability: float = 0.02
    hotspot_severe_probability: Optional[float] = None
    severity_zones: FrozenSet[int] = frozenset()
    severity_zone_probability: float = 0.5
    severity_zone_intensity: Optional[float] = None
    seed: int = 0
    reference: Tuple[float, float] = field(default_factory=lambda: _DEFAULTS.reference)
    window: Tuple[str, str] = (_DEFAULTS.WINDOW_START, _DEFAULTS.WINDOW_END)

    def __post_init__(self):
        object.__setattr__(self, "hotspot_zones", frozenset(int(i) for i in self.hotspot_zones))
        object.__setattr__(self, "severity_zones", frozenset(int(i) for i in self.severity_zones))
        problems = []
        if self.grid < 3:
            problems.append(("grid", self.grid, "[3, inf)"))
        if not self.cell_size > 0:
            problems.append(("cell_size", self.cell_size, "(0, inf)"))
        if self.base_intensity < 0:
            problems.append(("base_intensity", self.base_intensity, "[0, inf)"))
        if self.hotspot_multiplier < 1:
            problems.append(("hotspot_multiplier", self.hotspot_multiplier, "[1, inf)"))
        for name in ("severe_probability", "hotspot_severe_probability", "severity_zone_probability"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                problems.append((name, value, "[0, 1]"))
        if self.severity_zone_intensity is not None and self.severity_zone_intensity < 0:
            problems.append(("severity_zone_intensity", self.severity_zone_intensity, "[0, inf)"))
        if problems:
            name, value, allowed = problems[0]
            raise ConfigurationError(ErrorMessages.PARAMETER_RANGE.value.format(name=name, value=value, allowed=allowed))

    def check_zone_indices(self, n_zones: int) -> None:
        bad = sorted(i for i in self.hotspot_zones | self.severity_zones if not 0 <= i < n_zones)
        if bad:
            raise ConfigurationError(
                ErrorMessages.PARAMETER_RANGE.value.format(name="zone index", value=bad[0], allowed=f"[0, {n_zones})")
            )

    def intensity(self, index: int) -> float:
        """Expected events in zone ``index``."""
        base = self.base_intensity
        if index in self.severity_zones and self.severity_zone_intensity is not None:
            base = self.severity_zone_intensity
        return base * (self.hotspot_multiplier if index in self.hotspot_zones else 1.0)

    def severity(self, index: int) -> float:
        """Severe probability of the zone's stratum."""
        if index in self.severity_zones:
            return self.severity_zone_probability
        if index in self.hotspot_zones and self.hotspot_severe_probability is not None:
            return self.hotspot_severe_probability
        return self.severe_probability


@dataclass(frozen=True, eq=False)
class SynthFixture:
    """Zones (lon/lat), canonical records and per-zone ground truth."""

    zones: List[ZonePolygon]
    records: pd.DataFrame
    truth: pd.DataFrame
    spec: SynthSpec

    @property
    def zone_ids(self) -> List[str]:
        return distinct_zone_ids(self.zones)


def block_indices(grid: int, row: int, col: int, size: int = 3) -> FrozenSet[int]:
    """Zone indices of a size x size block whose south-west zone is (row, col)."""
    return frozenset((row + dr) * grid + (col + dc) for dr in range(size) for dc in range(size))


def block_interior(grid: int, indices: FrozenSet[int]) -> FrozenSet[int]:
    """Members of ``indices`` whose four edge neighbours are also members."""
    interior = set()
    for index in indices:
        row, col = divmod(index, grid)
        edges = [(row - 1, col), (row + 1, col), (row, col - 1), (row, col + 1)]
        if all(0 <= r < grid and 0 <= c < grid and r * grid + c in indices for r, c in edges):
            interior.add(index)
    return frozenset(interior)


def lattice_zones(spec: SynthSpec) -> Tuple[List[ZonePolygon], np.ndarray]:
    """
    Square lattice centred on the reference point.

    Returns:
        (zones in lon/lat, planar lower-left corners of shape (g*g, 2))
    """
    g, s = spec.grid, spec.cell_size
    half = g * s / 2.0
    corners = np.array([(col * s - half, row * s - half) for row in range(g) for col in range(g)], dtype=float)
    zones = []
    for index, (x0, y0) in enumerate(corners):
        square = np.array([(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s), (x0, y0)])
        zones.append(ZonePolygon(_zone_id(index), unproject(square, spec.reference)))
    return zones, corners


def _zone_id(index: int) -> str:
    return f"Z{index:04d}"


def _timestamps(rng: np.random.Generator, spec: SynthSpec, count: int) -> pd.Series:
    start, end = (pd.Timestamp(value) for value in parse_window(*spec.window))
    seconds = rng.integers(0, int((end - start).total_seconds()) + 1, size=count)
    return pd.Series(start + pd.to_timedelta(seconds, unit="s"))


def _zone_records(rng: np.random.Generator, spec: SynthSpec, index: int, lonlat: np.ndarray) -> pd.DataFrame:
    count = len(lonlat)
    frame = pd.DataFrame(
        {
            "report_id": [f"SYN{index:04d}-{event:06d}" for event in range(count)],
            "timestamp": _timestamps(rng, spec, count),
            "lon": lonlat[:, 0],
            "lat": lonlat[:, 1],
            "severe": rng.random(count) < spec.severity(index),
        }
    )
    draws = rng.random((count, len(FLAG_GROUPS)))
    for column, group in enumerate(FLAG_GROUPS):
        # Flags sharing a raw column are mutually exclusive
        low = 0.0
        for name in group:
            high = low + FLAG_PROBABILITIES[name]
            frame[name] = (draws[:, column] >= low) & (draws[:, column] < high)
            low = high
    frame = frame[RECORD_COLUMNS]
    return frame


def _truth_row(spec: SynthSpec, index: int, zone_id: str, count: int, severe: int) -> Dict[str, object]:
    return {
        "zone_id": zone_id,
        "index": index,
        "hotspot": index in spec.hotspot_zones and spec.hotspot_multiplier > 1,
        "severity_zone": index in spec.severity_zones,
        "intensity": spec.intensity(index),
        "severe_probability": spec.severity(index),
        "count": count,
        "severe": severe,
    }


def _assemble(spec: SynthSpec, zones: List[ZonePolygon], parts: List[pd.DataFrame], truth: List[Dict]) -> SynthFixture:
    non_empty = [part for part in parts if len(part)]
    records = pd.concat(non_empty, ignore_index=True) if non_empty else pd.DataFrame(columns=RECORD_COLUMNS)
    fixture = SynthFixture(
        zones=zones,
        records=typed_frame(records[RECORD_COLUMNS]),
        truth=pd.DataFrame(truth),
        spec=spec,
    )
    logger.info(
        f"Synthetic fixture: {len(fixture.zone_ids)} zones, {len(fixture.records)} records, "
        f"{int(fixture.truth['hotspot'].sum())} planted hotspot zones"
    )
    return fixture


def generate(spec: SynthSpec, workers: int = 1) -> SynthFixture:
    """
    Lattice fixture with planted hotspots.

    Args:
        spec: Fixture parameters
        workers: Threads over zones (output is identical for any value)

    Returns:
        SynthFixture
    """
    zones, corners = lattice_zones(spec)
    spec.check_zone_indices(len(zones))
    s = spec.cell_size

    def run_zone(index: int) -> pd.DataFrame:
        rng = ReproHelpers.substream(spec.seed, RandomStreams.SYNTH_ZONE, index)
        count = int(rng.poisson(spec.intensity(index)))
        offsets = EDGE_MARGIN + (1.0 - 2.0 * EDGE_MARGIN) * rng.random((count, 2))
        planar = corners[index] + s * offsets
        return _zone_records(rng, spec, index, unproject(planar, spec.reference))

    parts = ReproHelpers.parallel_map(run_zone, list(range(len(zones))), workers)
    truth = [
        _truth_row(spec, index, zones[index].zone_id, len(part), int(part["severe"].sum()))
        for index, part in enumerate(parts)
    ]
    return _assemble(spec, zones, parts, truth)


def generate_on_zones(zones: Sequence[ZonePolygon], spec: SynthSpec, workers: int = 1) -> SynthFixture:
    """
    Fixture on supplied lon/lat zones; zone index is the distinct-zone order.

    Locations are drawn uniformly by rejection within each zone's planar
    bounding box, accepting points inside any of the zone's parts.
    """
    zones = list(zones)
    zone_ids = distinct_zone_ids(zones)
    spec.check_zone_indices(len(zone_ids))
    planar_parts: Dict[str, List[ZonePolygon]] = {zone_id: [] for zone_id in zone_ids}
    for part in zones:
        planar_parts[part.zone_id].append(part.project(spec.reference))

    def run_zone(index: int) -> pd.DataFrame:
        parts = planar_parts[zone_ids[index]]
        rng = ReproHelpers.substream(spec.seed, RandomStreams.SYNTH_ZONE, index)
        count = int(rng.poisson(spec.intensity(index)))
        bounds = np.array([part.bounds for part in parts])
        low, high = bounds[:, :2].min(axis=0), bounds[:, 2:].max(axis=0)
        accepted: List[np.ndarray] = []
        have = 0
        while have < count:
            candidates = low + (high - low) * rng.random((REJECTION_BATCH, 2))
            inside = np.zeros(len(candidates), dtype=bool)
            for part in parts:
                inside |= points_in_polygon(candidates, part)
            accepted.append(candidates[inside])
            have += int(inside.sum())
        planar = np.concatenate(accepted)[:count] if accepted else np.zeros((0, 2))
        return _zone_records(rng, spec, index, unproject(planar, spec.reference))

    parts = ReproHelpers.parallel_map(run_zone, list(range(len(zone_ids))), workers)
    truth = [
        _truth_row(spec, index, zone_ids[index], len(part), int(part["severe"].sum()))
        for index, part in enumerate(parts)
    ]
    return _assemble(spec, zones, parts, truth)


def raw_frame(records: pd.DataFrame, mapping: Optional[ColumnMapping] = None) -> pd.DataFrame:
    """Records in the raw export layout described by ``mapping``."""
    mapping = mapping or ColumnMapping.default()
    severe_value = sorted(mapping.severe_values)[0]
    raw = pd.DataFrame(
        {
            mapping.report_id: records["report_id"],
            mapping.timestamp: records["timestamp"].dt.strftime(mapping.timestamp_format or RAW_TIMESTAMP_FORMAT),
            mapping.longitude: records["lon"].map(lambda v: f"{v:.7f}"),
            mapping.latitude: records["lat"].map(lambda v: f"{v:.7f}"),
            mapping.severity: np.where(records["severe"], severe_value, "NO APPARENT INJURY"),
        }
    )
    for name in CrashFlags.get_all_types():
        column = mapping.flag_columns[name]
        value = sorted(mapping.flag_values[name])[0]
        flagged = np.where(records[name], value, "")
        if column in raw.columns:
            # Several flags can share one raw column; first set flag wins
            raw[column] = np.where(raw[column] != "", raw[column], flagged)
        else:
            raw[column] = flagged
    return raw


def write_fixture(fixture: SynthFixture, output_dir: Path, mapping: Optional[ColumnMapping] = None) -> Dict[str, Path]:
    """
    Write ``crashes.csv`` (raw layout), ``zones.geojson`` and ``truth.csv``.

    Returns:
        Mapping of artifact name to path
    """
    output_dir = ReproHelpers.ensure_dir(Path(output_dir))
    raw = raw_frame(fixture.records, mapping)
    paths = {
        "crashes": ReproHelpers.write_text(output_dir / "crashes.csv", raw.to_csv(index=False, lineterminator="\n")),
        "zones": ReproHelpers.write_json(output_dir / "zones.geojson", zones_to_geojson(fixture.zones)),
        "truth": ReproHelpers.write_text(
            output_dir / "truth.csv", fixture.truth.to_csv(index=False, lineterminator="\n")
        ),
    }
    return paths
