"""
Tests for Silverman bandwidth, grid construction, density evaluation and raster output.
"""

import math

import numpy as np
import pytest

from src.analysis.kde import GridSpec, KdeGrid, auto_grid, estimate, kde_grid, silverman_bandwidth
from src.reporting.raster import ascii_grid_text, export_raster, pgm_bytes, read_ascii_grid
from src.utils.exceptions import ConfigurationError, DataError, DegeneracyError, DomainError, SizingError


def naive_density(points, spec, bandwidth):
    xs, ys = np.meshgrid(spec.column_centers(), spec.row_centers())
    total = np.zeros_like(xs)
    for px, py in points:
        total += np.exp(-((xs - px) ** 2 + (ys - py) ** 2) / (2 * bandwidth ** 2))
    return total / (2 * math.pi * bandwidth ** 2 * len(points))


class TestSilverman:
    def test_two_points_closed_form(self):
        # sigma = mean(70.71, 0) = 35.36, IQR = mean(50, 0) = 25
        h = silverman_bandwidth([(0.0, 0.0), (100.0, 0.0)])
        assert h == pytest.approx(1.06 * (25 / 1.34) * 2 ** -0.2)

    def test_falls_back_to_sigma_without_spread(self):
        # IQR of both axes is zero while the outlier gives a positive sigma
        points = [(0.0, 0.0)] * 9 + [(100.0, 100.0)]
        sigma = np.std([0.0] * 9 + [100.0], ddof=1)
        assert silverman_bandwidth(points) == pytest.approx(1.06 * sigma * 10 ** -0.2)

    def test_no_points_is_domain_error(self):
        with pytest.raises(DomainError):
            silverman_bandwidth(np.zeros((0, 2)))
        with pytest.raises(DomainError):
            estimate([], cell_size=10.0)

    @pytest.mark.parametrize("points", [[(1.0, 1.0)], [(3.0, 4.0)] * 5])
    def test_degenerate_point_sets(self, points):
        with pytest.raises(DegeneracyError):
            silverman_bandwidth(points)


class TestGrid:
    def test_auto_grid_pads_by_cutoff(self):
        spec = auto_grid([(0.0, 0.0), (1000.0, 500.0)], bandwidth=50.0, cell_size=100.0)
        assert (spec.origin_x, spec.origin_y) == (-300.0, -300.0)
        assert (spec.n_cols, spec.n_rows) == (16, 11)

    def test_oversized_grid(self):
        with pytest.raises(SizingError):
            auto_grid([(0.0, 0.0), (1e6, 1e6)], bandwidth=10.0, cell_size=1.0, max_cells=1000)

    @pytest.mark.parametrize("cell_size", [0.0, -5.0, float("inf")])
    def test_invalid_cell_size(self, cell_size):
        with pytest.raises(ConfigurationError):
            GridSpec(0.0, 0.0, cell_size, 10, 10)


class TestKdeGrid:
    def test_single_point_peak(self):
        spec = GridSpec(-50.0, -50.0, 10.0, 11, 11)
        grid = kde_grid([(5.0, 5.0)], bandwidth=10.0, spec=spec)
        assert grid.values[5, 5] == pytest.approx(1 / (2 * math.pi * 100))
        assert grid.values[5, 5] == pytest.approx(1.59155e-3, rel=1e-5)
        assert grid.values.max() == grid.values[5, 5]

    def test_mass_with_padded_grid(self, rng):
        points = rng.uniform(0, 2000, size=(300, 2))
        grid = estimate(points, cell_size=10.0, bandwidth=60.0)
        assert 0.95 <= grid.mass <= 1.0 + 1e-6

    def test_non_negative(self, rng):
        grid = estimate(rng.normal(0, 300, size=(200, 2)), cell_size=50.0)
        assert (grid.values >= 0).all()

    def test_matches_untruncated_double_loop(self, rng):
        """
        Default 6-bandwidth cutoff against the full double loop.

        Truncation drops at most exp(-18) of one kernel peak per point, so the
        1e-6 relative bound is checked with an absolute floor of that size.
        """
        points = rng.uniform(0, 1000, size=(500, 2))
        spec = GridSpec(0.0, 0.0, 5.0, 200, 200)
        bandwidth = 40.0
        grid = kde_grid(points, bandwidth, spec)
        naive = naive_density(points, spec, bandwidth)
        tail = 2e-8 / (2 * math.pi * bandwidth ** 2)
        np.testing.assert_allclose(grid.values, naive, rtol=1e-6, atol=tail)

    def test_relative_error_without_truncation(self, rng):
        points = rng.uniform(0, 1000, size=(500, 2))
        spec = GridSpec(0.0, 0.0, 5.0, 200, 200)
        # 40 bandwidths spans the whole grid diagonal, so nothing is cut off
        grid = kde_grid(points, 40.0, spec, cutoff=40.0)
        naive = naive_density(points, spec, 40.0)
        assert (naive > 0).all()
        np.testing.assert_allclose(grid.values, naive, rtol=1e-6, atol=0)

    def test_translation_shifts_grid(self, rng):
        points = rng.uniform(0, 800, size=(100, 2))
        spec = GridSpec(-100.0, -100.0, 20.0, 50, 50)
        base = kde_grid(points, 35.0, spec)
        shifted = kde_grid(points + [1000.0, -500.0], 35.0, GridSpec(900.0, -600.0, 20.0, 50, 50))
        np.testing.assert_allclose(shifted.values, base.values, rtol=1e-9, atol=1e-13)

    def test_worker_count_does_not_change_values(self, rng):
        points = rng.uniform(0, 5000, size=(400, 2))
        spec = GridSpec(0.0, 0.0, 50.0, 100, 100)
        single = kde_grid(points, 120.0, spec, workers=1)
        multi = kde_grid(points, 120.0, spec, workers=4)
        np.testing.assert_array_equal(single.values, multi.values)

    def test_empty_points(self):
        with pytest.raises(DomainError):
            kde_grid(np.zeros((0, 2)), 10.0, GridSpec(0.0, 0.0, 1.0, 2, 2))

    @pytest.mark.parametrize("bandwidth", [0.0, -1.0, float("nan")])
    def test_invalid_bandwidth(self, bandwidth):
        with pytest.raises(ConfigurationError):
            kde_grid([(0.0, 0.0)], bandwidth, GridSpec(0.0, 0.0, 1.0, 2, 2))


class TestRaster:
    def _grid(self, values, origin=(100.0, 200.0), cell=25.0):
        values = np.asarray(values, dtype=float)
        spec = GridSpec(origin[0], origin[1], cell, values.shape[1], values.shape[0])
        return KdeGrid(spec=spec, values=values, bandwidth=10.0)

    def test_ascii_layout_north_first(self):
        text = ascii_grid_text(self._grid([[1.0, 2.0], [3.0, 4.0]]))
        lines = text.splitlines()
        assert len(lines) == 8
        assert lines[:6] == [
            "ncols 2", "nrows 2", "xllcorner 100.0", "yllcorner 200.0", "cellsize 25.0", "NODATA_value -9999",
        ]
        # row 1 is north, so it is written first
        assert lines[6] == "3.00000000e+00 4.00000000e+00"

    def test_ascii_round_trip(self, tmp_path, rng):
        grid = self._grid(rng.uniform(0, 1e-3, size=(4, 3)))
        back = read_ascii_grid(export_raster(grid, tmp_path / "kde.asc"))
        assert back.spec == grid.spec
        np.testing.assert_allclose(back.values, grid.values, rtol=1e-8)

    def test_malformed_ascii(self, tmp_path):
        path = tmp_path / "bad.asc"
        path.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 2\n")
        with pytest.raises(DataError):
            read_ascii_grid(path)

    def test_constant_grid_is_uniform_gray(self):
        data = pgm_bytes(self._grid(np.full((3, 4), 0.5)))
        header = b"P5\n4 3\n255\n"
        assert data.startswith(header)
        assert set(data[len(header):]) == {128}

    def test_pgm_stretches_to_full_range(self, tmp_path):
        path = export_raster(self._grid([[0.0, 1.0], [2.0, 4.0]]), tmp_path / "kde.pgm")
        pixels = list(path.read_bytes()[-4:])
        # north row first: 2 -> 128, 4 -> 255, then 0 -> 0, 1 -> 64
        assert pixels == [128, 255, 0, 64]

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ConfigurationError):
            export_raster(self._grid([[1.0]]), tmp_path / "kde.tif")
