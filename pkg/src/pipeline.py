"""
Pipeline orchestrator.
Chains ingest, zone assignment, weights, autocorrelation, EBI, KDE and
temporal aggregation for each subcommand and stamps every output with a
reproducibility sidecar.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np
import pandas as pd

from .analysis import autocorr, ebi, kde, temporal
from .analysis.weights import SpatialWeights, knn_weights, row_standardize, symmetrize, write_weights_csv
from .config.constants import FORMULA_VARIANTS, RECORD_COLUMNS, CrashFlags, ErrorMessages
from .config.mapping import ColumnMapping
from .config.settings import RunConfig
from .geometry.assignment import ZoneAssignment, assign_zones
from .geometry.geojson import load_zones
from .geometry.polygons import ZonePolygon, distinct_zone_ids, zone_centroids
from .geometry.projection import project
from .reporting.exporters import write_lisa_csv, write_lisa_geojson, write_report
from .reporting.raster import export_raster
from .reporting.visualizations import ChartGenerator
from .synth.generator import SynthSpec, generate, generate_on_zones, write_fixture
from .utils.data_processor import CrashDataProcessor, aggregate_by_zone, apply_selectors, flag_shares
from .utils.exceptions import ConfigurationError, DataError, DegeneracyError, DomainError
from .utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

# Parameters that never change results and stay out of sidecars
UNSTAMPED_PARAMETERS = ("workers", "log_level", "csv_chunk_rows")


class HotspotPipeline:
    """
    Main orchestrator that coordinates ingest, spatial statistics and output
    writing for one validated run configuration.
    """

    def __init__(self, run: RunConfig):
        """Initialize pipeline state from a run configuration."""
        self.run = run
        self.config = run.analysis
        self.mapping = ColumnMapping.from_yaml(run.mapping_path) if run.mapping_path else ColumnMapping.default()
        self.output_dir = Path(run.output_dir)
        self.written: List[Path] = []

    # Shared steps

    def _parameters(self, **extra: Any) -> Dict[str, Any]:
        parameters = {
            key: value for key, value in self.config.as_dict().items() if key not in UNSTAMPED_PARAMETERS
        }
        parameters["reference"] = list(self.config.reference)
        parameters["selectors"] = list(self.run.selectors)
        parameters.update(extra)
        return parameters

    def _inputs(self) -> List[Optional[Path]]:
        return [
            self.run.crashes_path, self.run.counts_path, self.run.zones_path,
            self.run.mapping_path, self.run.config_path,
        ]

    def _stamp(self, path: Path, extra: Optional[Dict[str, Any]] = None, **parameters: Any) -> Path:
        """Record an output and write its metadata sidecar."""
        self.written.append(path)
        ReproHelpers.write_metadata(path, self.run.command, self._parameters(**parameters), self._inputs(), extra)
        return path

    def load_records(self) -> pd.DataFrame:
        """
        Read crash records: a canonical normalized CSV is read directly,
        anything else goes through the column mapping and quarantine.
        """
        path = Path(self.run.crashes_path)
        header = pd.read_csv(path, nrows=0, dtype=str, encoding="utf-8").columns if path.exists() else []
        if list(header) == RECORD_COLUMNS:
            records = CrashDataProcessor.read_normalized(path)
            logger.info(f"Read {len(records)} normalized records from {path}")
        else:
            records, _ = CrashDataProcessor(self.mapping, self.config).load_crashes(path)
        if self.run.selectors:
            records = apply_selectors(records, self.run.selectors)
            logger.info(f"{len(records)} records after selectors {self.run.selectors}")
        return records

    def load_zones(self) -> List[ZonePolygon]:
        return load_zones(self.run.zones_path, self.config.ZONE_ID_PROPERTY)

    def project_points(self, records: pd.DataFrame) -> np.ndarray:
        return project(records[["lon", "lat"]].to_numpy(dtype=float), self.config.reference)

    def zone_counts(self, records: pd.DataFrame, zones: List[ZonePolygon]) -> Tuple[pd.DataFrame, ZoneAssignment]:
        """Assign projected records to projected zones and count per zone."""
        planar_zones = [part.project(self.config.reference) for part in zones]
        assignment = assign_zones(self.project_points(records), planar_zones, self.config.WORKERS)
        counts = aggregate_by_zone(records, assignment, distinct_zone_ids(zones))
        return counts, assignment

    def build_weights(self, zones: List[ZonePolygon]) -> SpatialWeights:
        """KNN weights on projected zone centroids, shaped by the configuration."""
        planar_zones = [part.project(self.config.reference) for part in zones]
        zone_ids, centres = zone_centroids(planar_zones)
        w = knn_weights(centres, self.config.K_NEIGHBORS, zone_ids, self.config.WORKERS)
        if self.config.SYMMETRIZE:
            w = symmetrize(w)
        if self.config.ROW_STANDARDIZE:
            w = row_standardize(w)
        return w

    def counts_for_zones(self, zone_ids: List[str]) -> List[ebi.SeverityInput]:
        """
        Precomputed severity counts, reordered to the zone file's order.

        Ids absent from the zones file are ignored with a warning.

        Raises:
            DataError: a zone has no row, or a zone has several rows
        """
        rows: Dict[str, ebi.SeverityInput] = {}
        for item in ebi.read_severity_csv(self.run.counts_path):
            if item.zone_id in rows:
                raise DataError(ErrorMessages.DUPLICATE_ZONE_COUNTS.value.format(zone_id=item.zone_id))
            rows[item.zone_id] = item
        missing = [zone_id for zone_id in zone_ids if zone_id not in rows]
        if missing:
            raise DataError(ErrorMessages.MISSING_ZONE_COUNTS.value.format(count=len(missing), zone_id=missing[0]))
        extra = sorted(set(rows) - set(zone_ids))
        if extra:
            logger.warning(f"Ignoring severity counts for {len(extra)} zones not in the zones file: {extra[:5]}")
        return [rows[zone_id] for zone_id in zone_ids]

    def _moran_and_lisa(self, values: np.ndarray, w: SpatialWeights, label: str):
        c = self.config
        try:
            moran = autocorr.permutation_test_global(values, w, c.PERMUTATIONS, c.SEED, c.WORKERS)
            result = autocorr.lisa(values, w, c.PERMUTATIONS, c.SEED, c.ALPHA, c.FDR, c.WORKERS)
        except DegeneracyError as e:
            raise DegeneracyError(f"{e} (variable {label} over {w.n} zones)") from e
        return moran, result

    def _analysis_report(
        self, moran, result, w: SpatialWeights, assignment: Optional[ZoneAssignment], **extra: Any
    ) -> Dict:
        report = {
            "global_moran": moran.to_dict(),
            "clusters": result.counts(),
            "significance_threshold": result.threshold,
            "zones": w.n,
            "weights": dict(w.metadata),
            "formula_variants": dict(FORMULA_VARIANTS),
        }
        if assignment is not None:
            report["records_assigned"] = assignment.assigned_count
            report["records_unassigned"] = assignment.unassigned_count
        report.update(extra)
        return report

    # Subcommands

    def run_ingest(self) -> List[Path]:
        """Normalize a raw export; write records, quarantine and flag shares."""
        processor = CrashDataProcessor(self.mapping, self.config)
        records, quarantine = processor.load_crashes(self.run.crashes_path)
        summary = processor.get_data_summary()
        self._stamp(processor.write_normalized(records, self.output_dir / "normalized.csv"), extra=summary)
        self._stamp(processor.write_quarantine(quarantine, self.output_dir / "quarantine.csv"), extra=summary)
        shares = flag_shares(records)
        shares["share"] = shares["share"].map(ReproHelpers.format_float)
        text = shares.to_csv(index=False, lineterminator="\n")
        self._stamp(ReproHelpers.write_text(self.output_dir / "summary.csv", text), extra=summary)
        return self.written

    def run_lisa(self) -> List[Path]:
        """Global Moran's I and LISA clusters of a per-zone count variable."""
        variable = self.run.variable
        allowed = ["total", "severe"] + CrashFlags.get_all_types()
        if variable not in allowed:
            raise ConfigurationError(ErrorMessages.UNKNOWN_FLAG.value.format(name=variable, allowed=", ".join(allowed)))
        records = self.load_records()
        zones = self.load_zones()
        counts, assignment = self.zone_counts(records, zones)
        w = self.build_weights(zones)
        values = counts[variable].to_numpy(dtype=float)
        moran, result = self._moran_and_lisa(values, w, variable)

        zone_ids = list(counts["zone_id"])
        stamp = {"variable": variable}
        self._stamp(write_lisa_geojson(self.output_dir / "lisa.geojson", zones, zone_ids, result,
                                       id_property=self.config.ZONE_ID_PROPERTY), **stamp)
        self._stamp(write_lisa_csv(self.output_dir / "lisa.csv", zone_ids, result), **stamp)
        self._stamp(ReproHelpers.write_text(self.output_dir / "zone_counts.csv",
                                            counts.to_csv(index=False, lineterminator="\n")), **stamp)
        report = self._analysis_report(moran, result, w, assignment, variable=variable)
        self._stamp(write_report(self.output_dir / "lisa_report.json", report), **stamp)
        return self.written

    def run_ebi_lisa(self) -> List[Path]:
        """LISA on the standardized Empirical Bayes Index of severity."""
        zones = self.load_zones()
        if self.run.counts_path is not None:
            inputs, assignment = self.counts_for_zones(distinct_zone_ids(zones)), None
        else:
            counts, assignment = self.zone_counts(self.load_records(), zones)
            inputs = ebi.inputs_from_frame(counts)
        vector = ebi.ebi_transform(inputs)
        w = self.build_weights(zones)
        moran, result = self._moran_and_lisa(vector.ebi_standardized, w, "ebi_standardized")

        zone_ids = vector.zone_ids
        frame = vector.to_frame()
        extra = {
            row.zone_id: {"severe": int(s), "total": int(t), "rate": row.rate, "std": row.std, "ebi": row.ebi}
            for row, s, t in zip(frame.itertuples(index=False), vector.severe, vector.total)
        }
        self._stamp(ebi.write_ebi_csv(vector, self.output_dir / "ebi.csv"), extra={"ebi": vector.notes})
        self._stamp(write_lisa_geojson(self.output_dir / "ebi_lisa.geojson", zones, zone_ids, result, extra,
                                       self.config.ZONE_ID_PROPERTY), extra={"ebi": vector.notes})
        self._stamp(write_lisa_csv(self.output_dir / "ebi_lisa.csv", zone_ids, result), extra={"ebi": vector.notes})
        report = self._analysis_report(moran, result, w, assignment, ebi=vector.report())
        self._stamp(write_report(self.output_dir / "ebi_report.json", report), extra={"ebi": vector.notes})
        return self.written

    def configured_grid(self) -> Optional[kde.GridSpec]:
        """Grid from the configuration, or None for an automatic one."""
        c = self.config
        if c.GRID:
            try:
                spec = kde.GridSpec(
                    origin_x=float(c.GRID["origin_x"]),
                    origin_y=float(c.GRID["origin_y"]),
                    cell_size=float(c.GRID.get("cell_size", c.CELL_SIZE)),
                    n_cols=int(c.GRID["n_cols"]),
                    n_rows=int(c.GRID["n_rows"]),
                )
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigurationError(f"Grid needs origin_x, origin_y, n_cols and n_rows: {e}") from e
            spec.check_size(c.MAX_GRID_CELLS)
            return spec
        return None

    def run_kde(self) -> List[Path]:
        """Gaussian KDE raster of (optionally filtered) collision locations."""
        c = self.config
        points = self.project_points(self.load_records())
        if len(points) == 0:
            raise DomainError(ErrorMessages.EMPTY_POINTS.value)
        grid = kde.estimate(points, c.CELL_SIZE, c.BANDWIDTH, self.configured_grid(), c.CUTOFF_BANDWIDTHS,
                            c.WORKERS, c.MAX_GRID_CELLS)
        spec = grid.spec
        extra = {
            "bandwidth_m": grid.bandwidth,
            "bandwidth_rule": "fixed" if c.BANDWIDTH is not None else "silverman",
            "kernel": grid.kernel,
            "cutoff_bandwidths": c.CUTOFF_BANDWIDTHS,
            "grid": {"origin_x": spec.origin_x, "origin_y": spec.origin_y, "cell_size": spec.cell_size,
                     "n_cols": spec.n_cols, "n_rows": spec.n_rows},
            "points": int(len(points)),
            "mass": grid.mass,
        }
        self._stamp(export_raster(grid, self.output_dir / "kde.asc"), extra=extra)
        if self.run.raster_pgm:
            self._stamp(export_raster(grid, self.output_dir / "kde.pgm"), extra=extra)
        return self.written

    def run_temporal(self) -> List[Path]:
        """Monthly series, seasonality matrices and optional charts."""
        records = self.load_records()
        window = self.config.window
        series = temporal.monthly_series(records, window)
        matrix = temporal.seasonal_matrix(series)
        by_flag = temporal.flag_monthly_series(records, window)
        severe_matrix = temporal.seasonal_matrix(by_flag, value="severe")

        extra = {"records_in_window": int(series["count"].sum())}
        self._stamp(temporal.write_series_csv(series, self.output_dir / "monthly.csv"), extra=extra)
        self._stamp(temporal.write_matrix_csv(matrix, self.output_dir / "seasonal.csv"), extra=extra)
        self._stamp(temporal.write_series_csv(by_flag, self.output_dir / "monthly_by_flag.csv"), extra=extra)
        self._stamp(temporal.write_matrix_csv(severe_matrix, self.output_dir / "seasonal_severe.csv"), extra=extra)
        report = temporal.temporal_report(matrix, severe_matrix)
        self._stamp(write_report(self.output_dir / "temporal_report.json", report), extra=extra)
        if self.run.charts:
            for path in ChartGenerator().write_temporal_charts(series, matrix, by_flag, self.output_dir):
                self._stamp(path, extra=extra)
        return self.written

    def run_synth(self, spec: SynthSpec) -> List[Path]:
        """Write a synthetic fixture (lattice, or supplied zones when given)."""
        if self.run.zones_path is not None:
            fixture = generate_on_zones(self.load_zones(), spec, self.config.WORKERS)
        else:
            fixture = generate(spec, self.config.WORKERS)
        extra = {
            "synth": {
                "grid": spec.grid,
                "cell_size": spec.cell_size,
                "base_intensity": spec.base_intensity,
                "hotspot_zones": sorted(spec.hotspot_zones),
                "hotspot_multiplier": spec.hotspot_multiplier,
                "severe_probability": spec.severe_probability,
                "hotspot_severe_probability": spec.hotspot_severe_probability,
                "severity_zones": sorted(spec.severity_zones),
                "severity_zone_probability": spec.severity_zone_probability,
                "severity_zone_intensity": spec.severity_zone_intensity,
                "seed": spec.seed,
                "reference": list(spec.reference),
            }
        }
        for path in write_fixture(fixture, self.output_dir, self.mapping).values():
            self._stamp(path, extra=extra)
        return self.written

    def run_weights_export(self) -> List[Path]:
        """Export the KNN weights the analysis commands would use."""
        w = self.build_weights(self.load_zones())
        path = write_weights_csv(w, self.output_dir / "weights.csv")
        self._stamp(path, extra={"weights": dict(w.metadata)})
        self.written.append(path.with_name(path.stem + ".header.json"))
        return self.written
