"""
Tests for projection, point-in-polygon, zone assignment, centroids and GeoJSON.
"""

import math

import numpy as np
import pytest

from src.geometry.assignment import UNASSIGNED, assign_zones, assign_zones_naive
from src.geometry.geojson import zones_from_geojson, zones_to_geojson
from src.geometry.polygons import (
    ZonePolygon,
    centroid,
    point_in_polygon,
    points_in_polygon,
    zone_centroid,
    zone_centroids,
)
from src.geometry.projection import GeoPoint, PlanarPoint, project, project_point, unproject
from src.utils.exceptions import CoordinateError, DataError, StructuralError
from tests.conftest import lattice, square

REFERENCE = (-77.2, 39.15)


class TestProjection:
    def test_reference_maps_to_origin(self):
        assert project_point(GeoPoint(*REFERENCE), REFERENCE) == PlanarPoint(0.0, 0.0)

    def test_north_offset(self):
        x, y = project_point(GeoPoint(-77.2, 39.16), REFERENCE)
        assert y == pytest.approx(6_371_000 * 0.01 * math.pi / 180)
        assert y == pytest.approx(1111.95, abs=0.01)
        assert x == pytest.approx(0.0, abs=1e-9)

    def test_east_offset_scaled_by_latitude(self):
        x, y = project_point(GeoPoint(-77.19, 39.15), REFERENCE)
        expected = 6_371_000 * 0.01 * math.pi / 180 * math.cos(math.radians(39.15))
        assert x == pytest.approx(expected, rel=1e-9)
        assert x == pytest.approx(862.3, abs=0.1)
        assert y == pytest.approx(0.0, abs=1e-9)

    def test_unproject_inverts_project(self, rng):
        lonlat = np.column_stack([rng.uniform(-77.5, -76.9, 200), rng.uniform(38.9, 39.4, 200)])
        np.testing.assert_allclose(unproject(project(lonlat, REFERENCE), REFERENCE), lonlat, atol=1e-9)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), 200.0])
    def test_bad_coordinate_names_index(self, bad):
        with pytest.raises(CoordinateError) as excinfo:
            project([(-77.0, 39.0), (bad, 39.0)], REFERENCE)
        assert excinfo.value.index == 1


class TestPointInPolygon:
    def test_inside_and_outside_unit_square(self):
        unit = square("U", 0, 0)
        assert point_in_polygon((0.5, 0.5), unit)
        assert not point_in_polygon((1.5, 0.5), unit)

    def test_hole_excludes_point(self):
        hole = [(0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)]
        assert not point_in_polygon((0.5, 0.5), square("U", 0, 0, holes=[hole]))
        assert point_in_polygon((0.1, 0.1), square("U", 0, 0, holes=[hole]))

    def test_shared_border_belongs_to_one_zone(self):
        left, right = square("L", 0, 0), square("R", 1, 0)
        on_border = np.array([[1.0, 0.5], [1.0, 0.25]])
        assert not points_in_polygon(on_border, left).any()
        assert points_in_polygon(on_border, right).all()

    def test_bottom_edge_inside_top_edge_outside(self):
        unit = square("U", 0, 0)
        assert point_in_polygon((0.5, 0.0), unit)
        assert not point_in_polygon((0.5, 1.0), unit)

    def test_degenerate_ring_rejected(self):
        with pytest.raises(StructuralError):
            ZonePolygon("bad", [(0, 0), (1, 0)])

    def test_ring_is_closed_automatically(self):
        poly = ZonePolygon("T", [(0, 0), (1, 0), (0, 1)])
        assert len(poly.outer_ring) == 4
        np.testing.assert_array_equal(poly.outer_ring[0], poly.outer_ring[-1])


class TestCentroid:
    def test_unit_square(self):
        assert centroid(square("U", 0, 0)) == pytest.approx((0.5, 0.5))

    def test_triangle(self):
        assert centroid(ZonePolygon("T", [(0, 0), (1, 0), (0, 1)])) == pytest.approx((1 / 3, 1 / 3))

    def test_square_with_centered_hole(self):
        hole = [(0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)]
        assert centroid(square("U", 0, 0, holes=[hole])) == pytest.approx((0.5, 0.5))

    def test_orientation_does_not_matter(self):
        clockwise = ZonePolygon("C", [(0, 0), (0, 2), (2, 2), (2, 0)])
        assert centroid(clockwise) == pytest.approx((1.0, 1.0))

    def test_multipart_zone_is_area_weighted(self):
        parts = [square("M", 0, 0, size=1.0), square("M", 10, 0, size=2.0)]
        # areas 1 and 4: x = (0.5 * 1 + 11 * 4) / 5
        assert zone_centroid(parts) == pytest.approx(((0.5 + 44.0) / 5, (0.5 + 4.0) / 5))

    def test_zero_area_rejected(self):
        with pytest.raises(StructuralError):
            centroid(ZonePolygon("flat", [(0, 0), (1, 0), (2, 0)]))

    def test_zone_centroids_in_first_appearance_order(self):
        zone_ids, centres = zone_centroids(lattice(2))
        assert zone_ids == ["Z0000", "Z0001", "Z0002", "Z0003"]
        np.testing.assert_allclose(centres, [[0.5, 0.5], [1.5, 0.5], [0.5, 1.5], [1.5, 1.5]])


class TestAssignment:
    def test_point_in_one_of_three_zones(self):
        zones = [square("A", 0, 0), square("B", 2, 0), square("C", 4, 0)]
        result = assign_zones(np.array([[0.5, 0.5], [9.0, 9.0]]), zones)
        assert result.as_ids() == ["A", None]
        assert result.indices[1] == UNASSIGNED
        assert result.assigned_count == 1
        assert result.unassigned_count == 1

    def test_multipart_parts_share_zone_index(self):
        zones = [square("A", 0, 0), square("B", 2, 0), square("A", 4, 0)]
        result = assign_zones(np.array([[4.5, 0.5], [2.5, 0.5]]), zones)
        assert result.zone_ids == ("A", "B")
        assert result.as_ids() == ["A", "B"]

    def test_matches_naive_scan_on_random_rectangles(self, rng):
        zones = []
        for i in range(50):
            x0, y0 = rng.uniform(0, 90, 2)
            w, h = rng.uniform(1, 15, 2)
            zones.append(ZonePolygon(f"R{i}", [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)]))
        points = rng.uniform(0, 100, size=(10_000, 2))
        fast = assign_zones(points, zones)
        naive = assign_zones_naive(points, zones)
        np.testing.assert_array_equal(fast.indices, naive.indices)

    @staticmethod
    def random_scene(rng):
        """Shared-border lattice, holed squares and loose rectangles over a 100 x 100 field."""
        grid = int(rng.integers(2, 11))
        cell = 60.0 / grid
        zones = lattice(grid, size=cell)
        for i in range(int(rng.integers(0, 51))):
            x0, y0 = rng.uniform(0, 90, 2)
            size = rng.uniform(2, 10)
            hole = [(x0 + size / 4, y0 + size / 4), (x0 + 3 * size / 4, y0 + size / 4),
                    (x0 + 3 * size / 4, y0 + 3 * size / 4), (x0 + size / 4, y0 + 3 * size / 4)]
            zones.append(square(f"H{i}", x0, y0, size, holes=[hole]))
        for i in range(int(rng.integers(0, 51))):
            x0, y0 = rng.uniform(0, 90, 2)
            w, h = rng.uniform(1, 15, 2)
            zones.append(ZonePolygon(f"R{i}", [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)]))
        ticks = np.arange(grid + 1) * cell
        half = ticks[:-1] + cell / 2
        border = np.array([(x, y) for x in ticks for y in np.concatenate([ticks, half])]
                          + [(x, y) for x in half for y in ticks])
        scatter = rng.uniform(-5, 105, size=(int(rng.integers(1, 10_001 - len(border))), 2))
        return zones, np.vstack([border, scatter])

    @pytest.mark.parametrize("seed", range(50))
    def test_matches_naive_scan_on_mixed_scenes(self, seed):
        zones, points = self.random_scene(np.random.default_rng(seed))
        assert len(zones) <= 200
        assert len(points) <= 10_000
        fast = assign_zones(points, zones)
        naive = assign_zones_naive(points, zones)
        assert fast.zone_ids == naive.zone_ids
        np.testing.assert_array_equal(fast.indices, naive.indices)

    def test_worker_count_does_not_change_result(self, rng):
        zones = lattice(5, size=10.0)
        points = rng.uniform(-5, 55, size=(50_000, 2))
        single = assign_zones(points, zones, workers=1)
        multi = assign_zones(points, zones, workers=4)
        np.testing.assert_array_equal(single.indices, multi.indices)

    def test_lattice_points_on_internal_borders_assigned_once(self):
        zones = lattice(3)
        grid = np.array([(x, y) for x in (0.0, 1.0, 2.0) for y in (0.0, 1.0, 2.0)])
        result = assign_zones(grid, zones)
        assert result.unassigned_count == 0
        np.testing.assert_array_equal(result.indices, assign_zones_naive(grid, zones).indices)


class TestGeoJson:
    def _document(self, geometry, properties=None):
        props = {"GEOID": "24031700101"} if properties is None else properties
        return {"type": "FeatureCollection",
                "features": [{"type": "Feature", "properties": props, "geometry": geometry}]}

    def test_polygon_with_hole(self):
        geometry = {"type": "Polygon", "coordinates": [
            [[0, 0], [4, 0], [4, 4], [0, 4], [0, 0]],
            [[1, 1], [2, 1], [2, 2], [1, 2], [1, 1]],
        ]}
        (zone,) = zones_from_geojson(self._document(geometry))
        assert zone.zone_id == "24031700101"
        assert len(zone.holes) == 1

    def test_multipolygon_yields_parts_with_same_id(self):
        geometry = {"type": "MultiPolygon", "coordinates": [
            [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]],
            [[[5, 5], [6, 5], [6, 6], [5, 6], [5, 5]]],
        ]}
        zones = zones_from_geojson(self._document(geometry))
        assert [z.zone_id for z in zones] == ["24031700101", "24031700101"]

    def test_missing_id_property(self):
        geometry = {"type": "Polygon", "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 0]]]}
        with pytest.raises(DataError):
            zones_from_geojson(self._document(geometry, properties={"NAME": "x"}))

    def test_unsupported_geometry(self):
        with pytest.raises(DataError):
            zones_from_geojson(self._document({"type": "Point", "coordinates": [0, 0]}))

    def test_write_then_read_keeps_zones(self):
        zones = [square("A", 0, 0), square("B", 1, 0), square("B", 3, 0)]
        document = zones_to_geojson(zones, {"A": {"label": "HH"}})
        kinds = [feature["geometry"]["type"] for feature in document["features"]]
        assert kinds == ["Polygon", "MultiPolygon"]
        assert document["features"][0]["properties"] == {"GEOID": "A", "label": "HH"}
        assert [z.zone_id for z in zones_from_geojson(document)] == ["A", "B", "B"]
