"""
Zone polygons: ring normalization, even-odd containment and area-weighted centroids.

Containment uses the half-open edge convention: an edge includes its lower
endpoint and excludes its upper one, and a point exactly on a left/bottom
boundary is inside while one on a right/top boundary is outside. Two zones
sharing a border therefore never both contain a point on it.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple
import logging

import numpy as np

from ..config.constants import ErrorMessages
from ..utils.exceptions import StructuralError
from .projection import PlanarPoint, project

logger = logging.getLogger(__name__)


def _close_ring(ring: Sequence[Sequence[float]], zone_id: str) -> np.ndarray:
    array = np.asarray(ring, dtype=float).reshape(-1, 2)
    if len(array) and not np.array_equal(array[0], array[-1]):
        array = np.vstack([array, array[:1]])
    if len(array) < 4:
        raise StructuralError(ErrorMessages.DEGENERATE_RING.value.format(zone_id=zone_id, count=len(array)))
    return array


@dataclass(frozen=True, eq=False)
class ZonePolygon:
    """
    One polygon part of a zone. Multi-part zones are several ZonePolygon
    entries sharing a ``zone_id``.
    """

    zone_id: str
    outer_ring: np.ndarray
    holes: Tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "zone_id", str(self.zone_id))
        object.__setattr__(self, "outer_ring", _close_ring(self.outer_ring, self.zone_id))
        object.__setattr__(self, "holes", tuple(_close_ring(hole, self.zone_id) for hole in self.holes))

    @property
    def rings(self) -> Tuple[np.ndarray, ...]:
        return (self.outer_ring,) + self.holes

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) of the outer ring."""
        ring = self.outer_ring
        return float(ring[:, 0].min()), float(ring[:, 1].min()), float(ring[:, 0].max()), float(ring[:, 1].max())

    def project(self, reference: Tuple[float, float]) -> "ZonePolygon":
        """Same polygon with every ring projected to planar meters."""
        return ZonePolygon(
            self.zone_id,
            project(self.outer_ring, reference),
            tuple(project(hole, reference) for hole in self.holes),
        )


def points_in_polygon(points: np.ndarray, poly: ZonePolygon) -> np.ndarray:
    """
    Vectorized even-odd containment test.

    Args:
        points: Array of shape (n, 2) in the polygon's coordinate space
        poly: Polygon to test against

    Returns:
        Boolean array of shape (n,)
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    px, py = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    for ring in poly.rings:
        x1, y1 = ring[:-1, 0], ring[:-1, 1]
        x2, y2 = ring[1:, 0], ring[1:, 1]
        for i in range(len(x1)):
            crosses = (y1[i] > py) != (y2[i] > py)
            if not crosses.any():
                continue
            # crosses implies y1 != y2, so the division is safe where it matters
            with np.errstate(divide="ignore", invalid="ignore"):
                x_cross = x1[i] + (py - y1[i]) * (x2[i] - x1[i]) / (y2[i] - y1[i])
            inside ^= crosses & (px < x_cross)
    return inside


def point_in_polygon(point: Sequence[float], poly: ZonePolygon) -> bool:
    """Scalar containment test for a PlanarPoint, GeoPoint or (x, y) pair."""
    return bool(points_in_polygon(np.asarray([point], dtype=float), poly)[0])


def _ring_moments(ring: np.ndarray) -> Tuple[float, float, float]:
    # Shift to the first vertex to limit cancellation on large coordinates
    origin = ring[0]
    shifted = ring - origin
    x0, y0 = shifted[:-1, 0], shifted[:-1, 1]
    x1, y1 = shifted[1:, 0], shifted[1:, 1]
    cross = x0 * y1 - x1 * y0
    area = cross.sum() / 2.0
    if area == 0.0:
        return 0.0, float(origin[0]), float(origin[1])
    cx = ((x0 + x1) * cross).sum() / (6.0 * area) + origin[0]
    cy = ((y0 + y1) * cross).sum() / (6.0 * area) + origin[1]
    return float(area), float(cx), float(cy)


def polygon_moments(poly: ZonePolygon) -> Tuple[float, float, float]:
    """Net area (outer minus holes) and the area-weighted first moments."""
    area, cx, cy = _ring_moments(poly.outer_ring)
    total = abs(area)
    mx, my = total * cx, total * cy
    for hole in poly.holes:
        hole_area, hx, hy = _ring_moments(hole)
        total -= abs(hole_area)
        mx -= abs(hole_area) * hx
        my -= abs(hole_area) * hy
    return total, mx, my


def centroid(poly: ZonePolygon) -> PlanarPoint:
    """
    Area-weighted centroid by the shoelace formula; holes subtract.

    Raises:
        StructuralError: total area is zero
    """
    return zone_centroid([poly])


def zone_centroid(parts: Iterable[ZonePolygon]) -> PlanarPoint:
    """Area-weighted centroid over every part of one zone."""
    parts = list(parts)
    total = mx = my = 0.0
    for part in parts:
        area, part_mx, part_my = polygon_moments(part)
        total += area
        mx += part_mx
        my += part_my
    if total <= 0.0:
        zone_id = parts[0].zone_id if parts else "?"
        raise StructuralError(ErrorMessages.ZERO_AREA.value.format(zone_id=zone_id))
    return PlanarPoint(mx / total, my / total)


def distinct_zone_ids(parts: Sequence[ZonePolygon]) -> List[str]:
    """Zone ids in order of first appearance."""
    return list(dict.fromkeys(part.zone_id for part in parts))


def zone_centroids(parts: Sequence[ZonePolygon]) -> Tuple[List[str], np.ndarray]:
    """
    Centroid per distinct zone.

    Returns:
        (zone_ids, array of shape (n_zones, 2))
    """
    zone_ids = distinct_zone_ids(parts)
    grouped = {zone_id: [] for zone_id in zone_ids}
    for part in parts:
        grouped[part.zone_id].append(part)
    centres = np.array([zone_centroid(grouped[zone_id]) for zone_id in zone_ids], dtype=float).reshape(-1, 2)
    return zone_ids, centres
