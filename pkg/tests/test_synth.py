"""
Tests for the synthetic fixture generator.
"""

import numpy as np
import pandas as pd
import pytest

from src.config.constants import CrashFlags
from src.geometry.assignment import assign_zones
from src.geometry.polygons import distinct_zone_ids
from src.geometry.projection import project
from src.synth.generator import (
    SynthSpec,
    block_indices,
    block_interior,
    generate,
    generate_on_zones,
    lattice_zones,
    write_fixture,
)
from src.utils.data_processor import CrashDataProcessor
from src.utils.exceptions import ConfigurationError


def planar_counts(fixture):
    reference = fixture.spec.reference
    zones = [zone.project(reference) for zone in fixture.zones]
    points = project(fixture.records[["lon", "lat"]].to_numpy(), reference)
    assignment = assign_zones(points, zones)
    return assignment, np.bincount(assignment.indices[assignment.indices >= 0], minlength=len(assignment.zone_ids))


class TestLattice:
    def test_ids_count_from_south_west(self):
        zones, corners = lattice_zones(SynthSpec(grid=4, cell_size=500.0))
        assert [zone.zone_id for zone in zones][:5] == ["Z0000", "Z0001", "Z0002", "Z0003", "Z0004"]
        assert len(zones) == 16
        np.testing.assert_allclose(corners[0], [-1000.0, -1000.0])
        np.testing.assert_allclose(corners[5], [-500.0, -500.0])
        west, south = zones[0].bounds[:2]
        assert west < zones[1].bounds[0]
        assert south < zones[4].bounds[1]

    def test_block_and_interior(self):
        block = block_indices(10, 3, 3)
        assert block == frozenset({33, 34, 35, 43, 44, 45, 53, 54, 55})
        assert block_interior(10, block) == frozenset({44})
        assert block_interior(10, block_indices(10, 0, 0, size=4)) == frozenset({11, 12, 21, 22})


class TestGenerate:
    def test_same_seed_same_fixture(self):
        spec = SynthSpec(grid=5, base_intensity=20, seed=42)
        pd.testing.assert_frame_equal(generate(spec).records, generate(spec).records)

    def test_worker_count_does_not_change_fixture(self):
        spec = SynthSpec(grid=6, base_intensity=15, seed=8, hotspot_zones=block_indices(6, 1, 1), hotspot_multiplier=3)
        single, multi = generate(spec, workers=1), generate(spec, workers=4)
        pd.testing.assert_frame_equal(single.records, multi.records)
        pd.testing.assert_frame_equal(single.truth, multi.truth)

    def test_different_seed_changes_fixture(self):
        a = generate(SynthSpec(grid=4, base_intensity=20, seed=1)).records
        b = generate(SynthSpec(grid=4, base_intensity=20, seed=2)).records
        assert not a[["lon", "lat"]].equals(b[["lon", "lat"]])

    def test_truth_counts_match_locations(self):
        fixture = generate(SynthSpec(grid=5, base_intensity=25, seed=3))
        assignment, counts = planar_counts(fixture)
        assert assignment.unassigned_count == 0
        assert counts.tolist() == fixture.truth["count"].tolist()
        assert fixture.truth["severe"].sum() == fixture.records["severe"].sum()

    def test_multiplier_one_plants_nothing(self):
        fixture = generate(SynthSpec(grid=4, base_intensity=5, hotspot_zones=frozenset({5}), hotspot_multiplier=1.0))
        assert not fixture.truth["hotspot"].any()
        assert fixture.truth["intensity"].nunique() == 1

    def test_hotspots_raise_intensity(self):
        spec = SynthSpec(grid=5, base_intensity=10, hotspot_zones=frozenset({12}), hotspot_multiplier=5)
        truth = generate(spec).truth.set_index("index")
        assert truth.loc[12, "hotspot"]
        assert truth.loc[12, "intensity"] == 50
        assert truth.loc[0, "intensity"] == 10

    def test_severity_strata(self):
        spec = SynthSpec(grid=4, base_intensity=30, severe_probability=0.0,
                         severity_zones=frozenset({2}), severity_zone_probability=1.0)
        truth = generate(spec).truth.set_index("index")
        assert truth.loc[2, "severe"] == truth.loc[2, "count"]
        assert truth.drop(index=2)["severe"].sum() == 0

    def test_shared_column_flags_are_exclusive(self):
        records = generate(SynthSpec(grid=6, base_intensity=200, seed=9)).records
        assert not (records[CrashFlags.PEDESTRIAN.value] & records[CrashFlags.ANIMAL.value]).any()
        assert records[CrashFlags.NO_TRAFFIC_CONTROL.value].mean() == pytest.approx(0.43, abs=0.05)

    @pytest.mark.parametrize(
        "kwargs",
        [{"grid": 2}, {"hotspot_multiplier": 0.5}, {"severe_probability": 1.5}, {"base_intensity": -1}],
    )
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ConfigurationError):
            SynthSpec(**kwargs)

    def test_zone_index_outside_lattice(self):
        with pytest.raises(ConfigurationError):
            generate(SynthSpec(grid=3, hotspot_zones=frozenset({9}), hotspot_multiplier=2))


class TestGenerateOnZones:
    def test_points_fall_in_their_zone(self):
        zones, _ = lattice_zones(SynthSpec(grid=3, cell_size=800.0))
        fixture = generate_on_zones(zones, SynthSpec(base_intensity=40, seed=6))
        assignment, counts = planar_counts(fixture)
        assert assignment.unassigned_count == 0
        assert counts.tolist() == fixture.truth["count"].tolist()
        assert fixture.zone_ids == distinct_zone_ids(zones)


class TestWriteFixture:
    def test_raw_files_ingest_back(self, tmp_path):
        fixture = generate(SynthSpec(grid=4, base_intensity=20, seed=11, severe_probability=0.3))
        paths = write_fixture(fixture, tmp_path)
        assert set(paths) == {"crashes", "zones", "truth"}

        records, quarantine = CrashDataProcessor().load_crashes(paths["crashes"])
        assert quarantine.empty
        expected = fixture.records
        assert records["report_id"].tolist() == expected["report_id"].tolist()
        assert records["timestamp"].tolist() == expected["timestamp"].tolist()
        np.testing.assert_allclose(records[["lon", "lat"]], expected[["lon", "lat"]], atol=5e-8)
        for name in ["severe"] + CrashFlags.get_all_types():
            assert records[name].tolist() == expected[name].tolist(), name
