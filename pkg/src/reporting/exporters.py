"""
Writers for cluster results: zone GeoJSON with LISA properties, per-zone CSV
tables and JSON run reports.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import logging

from ..analysis.autocorr import LisaResult
from ..config.constants import DEFAULT_ZONE_ID_PROPERTY
from ..geometry.polygons import ZonePolygon
from ..geometry.geojson import zones_to_geojson
from ..utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

LISA_CSV_COLUMNS = ["zone_id", "value", "z", "lag", "local_I", "pseudo_p", "quadrant", "label"]


def lisa_properties(zone_ids: Sequence[str], result: LisaResult) -> Dict[str, Dict[str, Any]]:
    """Per-zone GeoJSON properties for a LISA result."""
    return {
        zone_id: {
            "value": float(result.values[i]),
            "z": float(result.z[i]),
            "lag": float(result.lag[i]),
            "local_I": float(result.local_I[i]),
            "pseudo_p": float(result.pseudo_p[i]),
            "quadrant": str(result.quadrant[i]),
            "label": str(result.label[i]),
        }
        for i, zone_id in enumerate(zone_ids)
    }


def write_lisa_geojson(
    path: Path,
    zones: Sequence[ZonePolygon],
    zone_ids: Sequence[str],
    result: LisaResult,
    extra: Optional[Dict[str, Dict[str, Any]]] = None,
    id_property: str = DEFAULT_ZONE_ID_PROPERTY,
) -> Path:
    """
    Zones as a FeatureCollection carrying LISA columns.

    Args:
        path: Destination file
        zones: Zone parts in lon/lat
        zone_ids: Zone order of ``result``
        result: LISA statistics
        extra: Additional per-zone properties (e.g. EBI columns)
        id_property: Zone id property name

    Returns:
        Path written
    """
    properties = lisa_properties(zone_ids, result)
    for zone_id, values in (extra or {}).items():
        properties.setdefault(zone_id, {}).update(values)
    document = zones_to_geojson(zones, properties, id_property)
    return ReproHelpers.write_json(Path(path), document)


def write_lisa_csv(path: Path, zone_ids: Sequence[str], result: LisaResult) -> Path:
    lines: List[str] = [",".join(LISA_CSV_COLUMNS)]
    for i, zone_id in enumerate(zone_ids):
        numbers = (result.values[i], result.z[i], result.lag[i], result.local_I[i], result.pseudo_p[i])
        fields = [zone_id] + [ReproHelpers.format_float(v) for v in numbers]
        fields += [str(result.quadrant[i]), str(result.label[i])]
        lines.append(",".join(fields))
    return ReproHelpers.write_text(Path(path), "\n".join(lines) + "\n")


def write_report(path: Path, report: Dict[str, Any]) -> Path:
    """JSON run report with sorted keys."""
    return ReproHelpers.write_json(Path(path), report)
