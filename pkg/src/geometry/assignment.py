"""
Bulk point-to-zone assignment with an R-tree bounding-box prefilter.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
import shapely

from ..config.constants import SuccessMessages
from ..utils.exceptions import DataError
from ..utils.helpers import ReproHelpers
from .polygons import ZonePolygon, distinct_zone_ids, points_in_polygon

logger = logging.getLogger(__name__)

UNASSIGNED = -1
POINT_CHUNK = 20_000


@dataclass(frozen=True, eq=False)
class ZoneAssignment:
    """Zone index per record (``-1`` when no zone contains it)."""

    indices: np.ndarray
    zone_ids: Tuple[str, ...]

    @property
    def assigned_count(self) -> int:
        return int((self.indices != UNASSIGNED).sum())

    @property
    def unassigned_count(self) -> int:
        return int((self.indices == UNASSIGNED).sum())

    def as_ids(self) -> List[Optional[str]]:
        """Zone id per record, ``None`` when unassigned."""
        return [self.zone_ids[i] if i != UNASSIGNED else None for i in self.indices]


def _part_to_zone(zones: Sequence[ZonePolygon]) -> Tuple[Tuple[str, ...], np.ndarray]:
    zone_ids = tuple(distinct_zone_ids(zones))
    position = {zone_id: i for i, zone_id in enumerate(zone_ids)}
    return zone_ids, np.array([position[part.zone_id] for part in zones], dtype=np.int64)


def _assign_chunk(points: np.ndarray, zones: Sequence[ZonePolygon], tree: shapely.STRtree) -> np.ndarray:
    """First containing part index per point, or UNASSIGNED."""
    best = np.full(len(points), np.iinfo(np.int64).max, dtype=np.int64)
    if len(points) == 0:
        return np.full(0, UNASSIGNED, dtype=np.int64)
    point_idx, part_idx = tree.query(shapely.points(points))
    order = np.lexsort((point_idx, part_idx))
    point_idx, part_idx = point_idx[order], part_idx[order]
    for part in np.unique(part_idx):
        candidates = point_idx[part_idx == part]
        hit = candidates[points_in_polygon(points[candidates], zones[part])]
        best[hit] = np.minimum(best[hit], part)
    best[best == np.iinfo(np.int64).max] = UNASSIGNED
    return best


def assign_zones(points: np.ndarray, zones: Sequence[ZonePolygon], workers: int = 1) -> ZoneAssignment:
    """
    Assign each point to the zone containing it.

    Candidates come from an STRtree over part bounding boxes; the exact
    test is the half-open even-odd rule. When parts overlap, the first part
    in input order wins, exactly as in a naive scan.

    Args:
        points: Array of shape (n, 2) in the zones' coordinate space
        zones: Zone polygon parts
        workers: Threads used over fixed point chunks

    Returns:
        ZoneAssignment over distinct zone ids
    """
    if not zones:
        raise DataError("assign_zones needs at least one zone")
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    zone_ids, part_zone = _part_to_zone(zones)
    boxes = shapely.box(*np.array([part.bounds for part in zones]).T)
    tree = shapely.STRtree(boxes)

    chunks = ReproHelpers.chunk_ranges(len(points), POINT_CHUNK)
    results = ReproHelpers.parallel_map(
        lambda rows: _assign_chunk(points[rows.start:rows.stop], zones, tree), chunks, workers
    )
    part_index = np.concatenate(results) if results else np.full(0, UNASSIGNED, dtype=np.int64)
    indices = np.where(part_index == UNASSIGNED, UNASSIGNED, part_zone[np.maximum(part_index, 0)])

    assignment = ZoneAssignment(indices=indices.astype(np.int64), zone_ids=zone_ids)
    logger.info(
        SuccessMessages.ZONES_ASSIGNED.value.format(
            assigned=assignment.assigned_count, unassigned=assignment.unassigned_count
        )
    )
    if assignment.unassigned_count:
        logger.warning(f"{assignment.unassigned_count} points fall outside every zone")
    return assignment


def assign_zones_naive(points: np.ndarray, zones: Sequence[ZonePolygon]) -> ZoneAssignment:
    """All-pairs reference scan; same result contract as :func:`assign_zones`."""
    if not zones:
        raise DataError("assign_zones needs at least one zone")
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    zone_ids, part_zone = _part_to_zone(zones)
    indices = np.full(len(points), UNASSIGNED, dtype=np.int64)
    for part_number, part in enumerate(zones):
        open_rows = indices == UNASSIGNED
        hit = np.zeros(len(points), dtype=bool)
        hit[open_rows] = points_in_polygon(points[open_rows], part)
        indices[hit] = part_zone[part_number]
    return ZoneAssignment(indices=indices, zone_ids=zone_ids)
