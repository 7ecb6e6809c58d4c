"""
Tests for Laplace-smoothed severity rates and the standardized EBI.
"""

import math

import numpy as np
import pandas as pd
import pytest

from src.analysis.ebi import (
    SeverityInput,
    ebi_transform,
    global_rate,
    inputs_from_frame,
    read_severity_csv,
    rate_std,
    smoothed_rate,
    write_ebi_csv,
)
from src.utils.exceptions import ConfigurationError, DegeneracyError, DomainError


class TestSmoothedRate:
    @pytest.mark.parametrize(
        "severe, total, expected",
        [(0, 0, 0.5), (3, 98, 0.04), (1, 9, 2 / 11)],
    )
    def test_examples(self, severe, total, expected):
        assert smoothed_rate(severe, total) == pytest.approx(expected, abs=1e-15)

    def test_vectorized(self):
        np.testing.assert_allclose(smoothed_rate(np.array([0, 3]), np.array([0, 98])), [0.5, 0.04])

    def test_rate_strictly_inside_unit_interval(self):
        assert 0.0 < smoothed_rate(0, 10_000) < smoothed_rate(10_000, 10_000) < 1.0

    def test_severe_exceeding_total(self):
        with pytest.raises(DomainError):
            smoothed_rate(5, 4)

    def test_negative_count(self):
        with pytest.raises(DomainError):
            smoothed_rate(-1, 4)


class TestRateStd:
    def test_zero_data_prior(self):
        assert rate_std(0.5, 0) == pytest.approx(math.sqrt(0.25 / 2))
        assert rate_std(0.5, 0) == pytest.approx(0.353553, abs=1e-6)

    def test_large_zone(self):
        assert rate_std(0.04, 98) == pytest.approx(math.sqrt(0.04 * 0.96 / 100))
        assert rate_std(0.04, 98) == pytest.approx(0.0195959, abs=1e-7)

    def test_monotone_decreasing_in_total(self):
        totals = np.array([0, 10, 100, 1000, 100_000])
        assert (np.diff(rate_std(np.full(5, 0.1), totals)) < 0).all()

    @pytest.mark.parametrize("rate", [0.0, 1.0])
    def test_rate_outside_open_interval(self, rate):
        with pytest.raises(DomainError):
            rate_std(rate, 10)


class TestGlobalRate:
    def test_single_empty_zone(self):
        assert global_rate([SeverityInput("a", 0, 0)]) == 0.5

    def test_pooled_sums(self):
        assert global_rate([SeverityInput("a", 1, 8), SeverityInput("b", 3, 18)]) == pytest.approx(5 / 28)


def recompute(inputs):
    """Cell-by-cell evaluation of the five EBI formulas."""
    rates = [(s + 1) / (t + 2) for _, s, t in inputs]
    stds = [math.sqrt(r * (1 - r) / (t + 2)) for r, (_, _, t) in zip(rates, inputs)]
    pooled = (sum(s for _, s, _ in inputs) + 1) / (sum(t for _, _, t in inputs) + 2)
    ebi = [(r - pooled) / sd for r, sd in zip(rates, stds)]
    mean = sum(ebi) / len(ebi)
    sd = math.sqrt(sum((e - mean) ** 2 for e in ebi) / len(ebi))
    return rates, stds, ebi, [(e - mean) / sd for e in ebi]


class TestEbiTransform:
    def test_zone_at_global_rate_has_zero_ebi(self):
        # pooled rate (3 + 1) / (6 + 2) = 0.5 equals zone a's smoothed rate
        vector = ebi_transform([SeverityInput("a", 1, 2), SeverityInput("b", 0, 2), SeverityInput("c", 2, 2)])
        assert vector.ebi[0] == 0.0
        assert vector.ebi[1] == pytest.approx(-vector.ebi[2])

    def test_constant_ebi_is_degenerate(self):
        with pytest.raises(DegeneracyError):
            ebi_transform([SeverityInput("a", 1, 2), SeverityInput("b", 1, 2)])

    def test_single_zone_is_degenerate(self):
        with pytest.raises(DegeneracyError):
            ebi_transform([SeverityInput("a", 1, 10)])

    def test_two_symmetric_zones(self):
        # smoothed rates 0.25 and 0.75 with equal std around a pooled 0.5
        vector = ebi_transform([SeverityInput("low", 0, 2), SeverityInput("high", 2, 2)])
        assert vector.global_severity_rate == pytest.approx(0.5)
        np.testing.assert_allclose(vector.ebi_standardized, [-1.0, 1.0])
        assert vector.ebi_standardized.mean() == pytest.approx(0.0, abs=1e-15)

    def test_matches_independent_recomputation(self, rng):
        totals = rng.integers(0, 400, size=20)
        severe = np.array([rng.integers(0, t + 1) for t in totals])
        inputs = [(f"z{i}", int(s), int(t)) for i, (s, t) in enumerate(zip(severe, totals))]
        vector = ebi_transform([SeverityInput(*row) for row in inputs])
        rates, stds, ebi, standardized = recompute(inputs)
        np.testing.assert_allclose(vector.severity_rate, rates, rtol=0, atol=1e-12)
        np.testing.assert_allclose(vector.severity_rate_std, stds, rtol=0, atol=1e-12)
        np.testing.assert_allclose(vector.ebi, ebi, rtol=0, atol=1e-12)
        np.testing.assert_allclose(vector.ebi_standardized, standardized, rtol=0, atol=1e-12)

    def test_standardized_moments(self, rng):
        totals = rng.integers(1, 200, size=30)
        inputs = [SeverityInput(str(i), int(rng.integers(0, t + 1)), int(t)) for i, t in enumerate(totals)]
        standardized = ebi_transform(inputs).ebi_standardized
        assert standardized.mean() == pytest.approx(0.0, abs=1e-12)
        assert standardized.std() == pytest.approx(1.0, abs=1e-12)

    def test_shrinkage_grows_with_evidence(self):
        # ratio 0.2 in zone "z", scaled up; the other zones fix the pooled rate near 0.02
        magnitudes = []
        for scale in (1, 10, 100):
            inputs = [SeverityInput("z", 2 * scale, 10 * scale)] + [
                SeverityInput(f"b{i}", 2, 100 + i) for i in range(10)
            ]
            vector = ebi_transform(inputs)
            magnitudes.append((abs(vector.ebi[0]), vector.severity_rate[0]))
        assert magnitudes[0][0] < magnitudes[1][0] < magnitudes[2][0]
        rates = [rate for _, rate in magnitudes]
        assert rates[0] > rates[1] > rates[2] > 0.2

    def test_severity_input_validates(self):
        with pytest.raises(DomainError):
            SeverityInput("bad", 3, 2)

    def test_report_names_formula_variants(self):
        report = ebi_transform([SeverityInput("low", 0, 2), SeverityInput("high", 2, 2)]).report()
        assert report["zones"] == 2
        assert set(report["formula_variants"]) == {"global_rate", "ebi_standardization"}


class TestEbiIo:
    def test_frame_requires_columns(self):
        with pytest.raises(ConfigurationError):
            inputs_from_frame(pd.DataFrame({"zone_id": ["a"], "severe": [1]}))

    def test_csv_round_trip(self, tmp_path):
        (tmp_path / "counts.csv").write_text("zone_id,severe,total\n001,0,2\n002,2,2\n")
        inputs = read_severity_csv(tmp_path / "counts.csv")
        assert [item.zone_id for item in inputs] == ["001", "002"]

        path = write_ebi_csv(ebi_transform(inputs), tmp_path / "ebi.csv")
        table = pd.read_csv(path, dtype={"zone_id": str})
        assert list(table.columns) == ["zone_id", "rate", "std", "ebi", "ebi_standardized"]
        np.testing.assert_allclose(table["rate"], [0.25, 0.75])
        np.testing.assert_allclose(table["ebi_standardized"], [-1.0, 1.0])
