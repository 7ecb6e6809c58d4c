"""
GeoJSON reading and writing for zone geometries.
"""

from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence
import json
import logging

import numpy as np

from ..config.constants import DEFAULT_ZONE_ID_PROPERTY, ErrorMessages, SuccessMessages
from ..utils.exceptions import ConfigurationError, DataError
from .polygons import ZonePolygon, distinct_zone_ids

logger = logging.getLogger(__name__)


def _polygon_parts(zone_id: str, coordinates: Sequence) -> ZonePolygon:
    outer, *holes = coordinates
    return ZonePolygon(zone_id, outer, tuple(holes))


def zones_from_geojson(document: Mapping[str, Any], id_property: str = DEFAULT_ZONE_ID_PROPERTY) -> List[ZonePolygon]:
    """
    Build zone parts from a FeatureCollection.

    Args:
        document: Parsed GeoJSON FeatureCollection
        id_property: Feature property holding the zone id

    Returns:
        One ZonePolygon per Polygon or MultiPolygon member
    """
    zones: List[ZonePolygon] = []
    for index, feature in enumerate(document.get("features", [])):
        properties = feature.get("properties") or {}
        if id_property not in properties or properties[id_property] in (None, ""):
            raise DataError(ErrorMessages.MISSING_ZONE_ID.value.format(index=index, key=id_property))
        zone_id = str(properties[id_property])
        geometry = feature.get("geometry") or {}
        kind = geometry.get("type")
        if kind == "Polygon":
            zones.append(_polygon_parts(zone_id, geometry["coordinates"]))
        elif kind == "MultiPolygon":
            zones.extend(_polygon_parts(zone_id, polygon) for polygon in geometry["coordinates"])
        else:
            raise DataError(ErrorMessages.UNSUPPORTED_GEOMETRY.value.format(index=index, kind=kind))
    return zones


def load_zones(path: Path, id_property: str = DEFAULT_ZONE_ID_PROPERTY) -> List[ZonePolygon]:
    """Read zone parts from a GeoJSON file."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=path))
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"Invalid GeoJSON {path}: {e}") from e
    zones = zones_from_geojson(document, id_property)
    if not zones:
        raise DataError(f"No zone polygons in {path}")
    logger.info(SuccessMessages.ZONES_LOADED.value.format(count=len(zones), zones=len(distinct_zone_ids(zones))))
    return zones


def _ring_to_list(ring: np.ndarray) -> List[List[float]]:
    return [[float(x), float(y)] for x, y in ring]


def zones_to_geojson(
    zones: Sequence[ZonePolygon],
    properties: Optional[Mapping[str, Dict[str, Any]]] = None,
    id_property: str = DEFAULT_ZONE_ID_PROPERTY,
) -> Dict[str, Any]:
    """
    FeatureCollection with one feature per distinct zone, in first-appearance order.

    Args:
        zones: Zone parts (multi-part zones become MultiPolygon features)
        properties: Extra properties per zone id
        id_property: Property name for the zone id

    Returns:
        GeoJSON document as a dict
    """
    grouped: Dict[str, List[ZonePolygon]] = {zone_id: [] for zone_id in distinct_zone_ids(zones)}
    for part in zones:
        grouped[part.zone_id].append(part)

    features = []
    for zone_id, parts in grouped.items():
        polygons = [[_ring_to_list(ring) for ring in part.rings] for part in parts]
        if len(polygons) == 1:
            geometry = {"type": "Polygon", "coordinates": polygons[0]}
        else:
            geometry = {"type": "MultiPolygon", "coordinates": polygons}
        feature_properties = {id_property: zone_id}
        feature_properties.update((properties or {}).get(zone_id, {}))
        features.append({"type": "Feature", "properties": feature_properties, "geometry": geometry})
    return {"type": "FeatureCollection", "features": features}
