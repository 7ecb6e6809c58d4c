"""
Monte-Carlo acceptance runs on synthetic fixtures: detection power of the
planted hotspot, calibration of the permutation tests under spatial
randomness, EBI recovery of a high-severity cluster and the KDE peak.
"""

import numpy as np
import pytest
from scipy import stats

from src.analysis import autocorr, ebi, kde
from src.config.settings import AnalysisConfig, RunConfig
from src.pipeline import HotspotPipeline
from src.synth.generator import SynthSpec, block_indices, block_interior, generate

pytestmark = pytest.mark.acceptance

GRID = 10
PLANTED_BLOCK = block_indices(GRID, 3, 3)
HIGH_SEVERITY_BLOCK = block_indices(GRID, 6, 6)


def make_pipeline(k=8, permutations=199, seed=0):
    analysis = AnalysisConfig(K_NEIGHBORS=k, PERMUTATIONS=permutations, SEED=seed)
    return HotspotPipeline(RunConfig(analysis=analysis, command="lisa"))


@pytest.fixture(scope="module")
def synth_weights():
    fixture = generate(SynthSpec(grid=GRID, base_intensity=1))
    return make_pipeline().build_weights(fixture.zones)


@pytest.fixture(scope="module")
def default_weights():
    fixture = generate(SynthSpec(grid=GRID, base_intensity=1))
    return HotspotPipeline(RunConfig(analysis=AnalysisConfig(), command="lisa")).build_weights(fixture.zones)


class TestDetectionPower:
    def test_planted_interior_labeled_high_high(self, default_weights):
        defaults = AnalysisConfig()
        assert (defaults.K_NEIGHBORS, defaults.PERMUTATIONS) == (10, 999)
        assert default_weights.metadata["k"] == defaults.K_NEIGHBORS
        interior = sorted(block_interior(GRID, PLANTED_BLOCK))
        assert interior == [44]
        recovered = 0
        for seed in range(100):
            fixture = generate(SynthSpec(grid=GRID, base_intensity=50, hotspot_zones=PLANTED_BLOCK,
                                         hotspot_multiplier=5, seed=seed))
            pipeline = HotspotPipeline(RunConfig(analysis=AnalysisConfig(SEED=seed), command="lisa"))
            counts, assignment = pipeline.zone_counts(fixture.records, fixture.zones)
            assert assignment.unassigned_count == 0
            result = autocorr.lisa(counts["total"].to_numpy(dtype=float), default_weights,
                                   permutations=defaults.PERMUTATIONS, seed=seed, alpha=defaults.ALPHA)
            recovered += all(result.label[i] == "HH" for i in interior)
        assert recovered >= 95

    def test_global_moran_rejects_randomness(self, synth_weights):
        fixture = generate(SynthSpec(grid=GRID, base_intensity=50, hotspot_zones=PLANTED_BLOCK,
                                     hotspot_multiplier=5, seed=11))
        values = fixture.truth["count"].to_numpy(dtype=float)
        moran = autocorr.permutation_test_global(values, synth_weights, permutations=999, seed=11)
        assert moran.I > 0.25
        assert moran.pseudo_p == pytest.approx(0.001)


class TestNullCalibration:
    def test_rejection_rates_per_tail(self, synth_weights):
        alpha, n = 0.05, GRID * GRID
        local_upper = local_lower = local_tests = 0
        global_upper = global_lower = 0
        folded = []
        trials = 400
        for seed in range(trials):
            truth = generate(SynthSpec(grid=GRID, base_intensity=20, seed=seed)).truth
            x = truth["count"].to_numpy(dtype=float)
            moran = autocorr.permutation_test_global(x, synth_weights, permutations=199, seed=seed)
            rejected = moran.pseudo_p <= alpha
            global_upper += rejected and moran.I >= moran.expected_I
            global_lower += rejected and moran.I < moran.expected_I
            folded.append(min(1.0, 2 * moran.pseudo_p))
            if seed < 200:
                local = autocorr.local_moran(x, synth_weights)
                p = autocorr.conditional_permutation_local(x, synth_weights, permutations=199, seed=seed)
                dev = autocorr.standardize_values(x)
                expected = -(dev.z ** 2) * synth_weights.row_sums / ((n - 1) * dev.m2)
                local_upper += int(((p <= alpha) & (local >= expected)).sum())
                local_lower += int(((p <= alpha) & (local < expected)).sum())
                local_tests += n
        assert 0.02 <= local_upper / local_tests <= 0.09
        assert 0.02 <= local_lower / local_tests <= 0.09
        assert 0.02 <= global_upper / trials <= 0.09
        assert 0.02 <= global_lower / trials <= 0.09
        assert stats.kstest(folded, "uniform").statistic < 0.1


class TestSeverityRecovery:
    @staticmethod
    def severity_inputs(fixture):
        return ebi.inputs_from_frame(fixture.truth.rename(columns={"count": "total"}))

    @staticmethod
    def severity_fixture(seed):
        # Low totals with a high severe share, planted away from the centre
        return generate(SynthSpec(grid=GRID, base_intensity=50, severity_zones=HIGH_SEVERITY_BLOCK,
                                  severity_zone_probability=0.5, severity_zone_intensity=20,
                                  severe_probability=0.01, seed=seed))

    def test_severity_zones_rank_highest(self):
        fixture = self.severity_fixture(3)
        vector = ebi.ebi_transform(self.severity_inputs(fixture))
        top = np.argsort(-vector.ebi_standardized, kind="stable")[:len(HIGH_SEVERITY_BLOCK)]
        assert set(top.tolist()) == set(HIGH_SEVERITY_BLOCK)
        # totals there are the lowest on the lattice
        assert fixture.truth.loc[sorted(HIGH_SEVERITY_BLOCK), "count"].max() < fixture.truth["count"].median()

    def test_ebi_lisa_finds_the_cluster(self, synth_weights):
        interior = sorted(block_interior(GRID, HIGH_SEVERITY_BLOCK))
        recovered = 0
        for seed in range(10):
            vector = ebi.ebi_transform(self.severity_inputs(self.severity_fixture(seed)))
            result = autocorr.lisa(vector.ebi_standardized, synth_weights, permutations=199, seed=seed)
            recovered += all(result.label[i] == "HH" for i in interior)
        assert recovered >= 9


class TestKdePeak:
    def test_peak_inside_planted_block(self):
        fixture = generate(SynthSpec(grid=GRID, base_intensity=50, hotspot_zones=PLANTED_BLOCK,
                                     hotspot_multiplier=5, seed=4))
        points = make_pipeline().project_points(fixture.records)
        grid = kde.estimate(points, cell_size=100.0, bandwidth=400.0)
        row, col = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        x, y = grid.spec.column_centers()[col], grid.spec.row_centers()[row]
        # lattice is centred on the reference point; the block spans columns and rows 3..5
        low, high = 3 * 1000.0 - 5000.0, 6 * 1000.0 - 5000.0
        assert low <= x <= high
        assert low <= y <= high
        assert grid.mass > 0.95
