"""
Geometry module: projection, polygon predicates, centroids and zone assignment.
"""

from .projection import GeoPoint, PlanarPoint, project, unproject, project_point
from .polygons import ZonePolygon, point_in_polygon, points_in_polygon, centroid, zone_centroids
from .assignment import ZoneAssignment, assign_zones, assign_zones_naive, UNASSIGNED
from .geojson import load_zones, zones_from_geojson, zones_to_geojson

__all__ = [
    "GeoPoint",
    "PlanarPoint",
    "project",
    "unproject",
    "project_point",
    "ZonePolygon",
    "point_in_polygon",
    "points_in_polygon",
    "centroid",
    "zone_centroids",
    "ZoneAssignment",
    "assign_zones",
    "assign_zones_naive",
    "UNASSIGNED",
    "load_zones",
    "zones_from_geojson",
    "zones_to_geojson",
]
