"""
Local equirectangular projection between geographic degrees and planar meters.
"""

from typing import NamedTuple, Sequence, Tuple, Union
import logging

import numpy as np

from ..config.constants import EARTH_RADIUS_M, ErrorMessages
from ..utils.exceptions import CoordinateError

logger = logging.getLogger(__name__)


class GeoPoint(NamedTuple):
    """Longitude/latitude in degrees."""

    lon: float
    lat: float


class PlanarPoint(NamedTuple):
    """Meters east/north of the projection reference."""

    x: float
    y: float


PointsLike = Union[np.ndarray, Sequence[Tuple[float, float]]]


def as_lonlat_array(points: PointsLike, check_ranges: bool = True) -> np.ndarray:
    """
    Convert points to an ``(n, 2)`` float array and reject bad coordinates.

    Args:
        points: GeoPoints, (lon, lat) tuples or an array
        check_ranges: Also enforce lon in [-180, 180] and lat in [-90, 90]

    Returns:
        Float array of shape (n, 2)
    """
    array = np.asarray(points, dtype=float).reshape(-1, 2)
    bad = ~np.isfinite(array).all(axis=1)
    if check_ranges:
        bad |= (np.abs(array[:, 0]) > 180.0) | (np.abs(array[:, 1]) > 90.0)
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        raise CoordinateError(
            ErrorMessages.NON_FINITE_COORDINATE.value.format(index=index, lon=array[index, 0], lat=array[index, 1]),
            index=index,
        )
    return array


def project(points: PointsLike, reference: Tuple[float, float]) -> np.ndarray:
    """
    Project geographic points onto a local plane around ``reference``.

    x = R * (lon - lon0) * cos(lat0) * pi/180, y = R * (lat - lat0) * pi/180

    Args:
        points: (lon, lat) pairs in degrees
        reference: (lon0, lat0) reference point

    Returns:
        Array of shape (n, 2) in meters
    """
    ref = as_lonlat_array([reference])[0]
    lonlat = as_lonlat_array(points)
    scale = EARTH_RADIUS_M * np.pi / 180.0
    x = scale * (lonlat[:, 0] - ref[0]) * np.cos(np.radians(ref[1]))
    y = scale * (lonlat[:, 1] - ref[1])
    return np.column_stack([x, y])


def unproject(points: PointsLike, reference: Tuple[float, float]) -> np.ndarray:
    """Inverse of :func:`project`."""
    ref = as_lonlat_array([reference])[0]
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    scale = EARTH_RADIUS_M * np.pi / 180.0
    lon = ref[0] + xy[:, 0] / (scale * np.cos(np.radians(ref[1])))
    lat = ref[1] + xy[:, 1] / scale
    return np.column_stack([lon, lat])


def project_point(point: GeoPoint, reference: Tuple[float, float]) -> PlanarPoint:
    """Single-point convenience wrapper around :func:`project`."""
    x, y = project([point], reference)[0]
    return PlanarPoint(float(x), float(y))
