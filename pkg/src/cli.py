"""
Command-line front-end.

Subcommands: ingest, lisa, ebi-lisa, kde, temporal, synth, weights-export.
Exit codes: 0 success, 2 configuration, 3 data, 4 degeneracy, 1 unexpected.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import argparse
import logging

from . import __version__
from .config.constants import ExitCodes
from .config.settings import AnalysisConfig, RunConfig
from .pipeline import HotspotPipeline
from .synth.generator import SynthSpec, block_indices
from .utils.exceptions import ConfigurationError, HotspotError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

# argparse dest -> AnalysisConfig field
ANALYSIS_FLAGS = (
    "k_neighbors",
    "permutations",
    "alpha",
    "seed",
    "fdr",
    "workers",
    "bandwidth",
    "cell_size",
    "cutoff_bandwidths",
    "grid",
    "window_start",
    "window_end",
    "symmetrize",
    "row_standardize",
    "zone_id_property",
    "log_level",
)

REQUIRED_PATHS = {
    "ingest": ("crashes_path",),
    "lisa": ("crashes_path", "zones_path"),
    "ebi-lisa": ("zones_path",),
    "kde": ("crashes_path",),
    "temporal": ("crashes_path",),
    "synth": (),
    "weights-export": ("zones_path",),
}


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _grid(text: str) -> Dict[str, float]:
    """``origin_x,origin_y,n_cols,n_rows[,cell_size]`` in projected meters."""
    parts = text.split(",")
    if len(parts) not in (4, 5):
        raise argparse.ArgumentTypeError("grid is origin_x,origin_y,n_cols,n_rows[,cell_size]")
    try:
        grid = {"origin_x": float(parts[0]), "origin_y": float(parts[1]),
                "n_cols": int(parts[2]), "n_rows": int(parts[3])}
        if len(parts) == 5:
            grid["cell_size"] = float(parts[4])
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e
    return grid


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="YAML configuration file")
    parser.add_argument("--mapping", type=Path, help="YAML column mapping (defaults to the ACRS export)")
    parser.add_argument("-o", "--output-dir", type=Path, default=Path("output"), help="Output directory")
    parser.add_argument("--workers", type=int, help="Worker threads (default: HOTSPOT_WORKERS or 1)")
    parser.add_argument("--seed", type=int, help="Run seed")
    parser.add_argument("--log-level", help="Logging level")


def _crashes(parser: argparse.ArgumentParser, filters: bool = True) -> None:
    parser.add_argument("--crashes", type=Path, help="Raw export or normalized crash CSV")
    if filters:
        parser.add_argument("--filter", action="append", dest="selectors", default=None,
                            help="Record selector: severe, a flag name, or not:<name> (repeatable)")


def _statistics(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--zones", type=Path, help="Zones GeoJSON")
    parser.add_argument("-k", "--k", dest="k_neighbors", type=int, help="Nearest neighbours (default 10)")
    parser.add_argument("--permutations", type=int, help="Permutation replicates (default 999)")
    parser.add_argument("--alpha", type=float, help="Significance level (default 0.05)")
    parser.add_argument("--fdr", action="store_true", default=None, help="Benjamini-Hochberg gating")
    parser.add_argument("--symmetrize", action="store_true", default=None, help="Use w OR w^T")
    parser.add_argument("--no-row-standardize", dest="row_standardize", action="store_false", default=None)
    parser.add_argument("--zone-id-property", help="GeoJSON property holding the zone id")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crash-hotspots", description="Crash hotspot spatial statistics")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="Normalize a raw crash export")
    _common(ingest)
    _crashes(ingest, filters=False)

    lisa = sub.add_parser("lisa", help="Global Moran's I and LISA clusters of zone counts")
    _common(lisa)
    _crashes(lisa)
    _statistics(lisa)
    lisa.add_argument("--variable", default="total", help="total, severe or a flag name")

    ebi_lisa = sub.add_parser("ebi-lisa", help="LISA clusters of the EBI severity rate")
    _common(ebi_lisa)
    _crashes(ebi_lisa)
    _statistics(ebi_lisa)
    ebi_lisa.add_argument("--counts", type=Path, help="zone_id,severe,total CSV used instead of --crashes")

    kde = sub.add_parser("kde", help="Kernel density raster")
    _common(kde)
    _crashes(kde)
    kde.add_argument("--bandwidth", type=float, help="Bandwidth in meters (default Silverman)")
    kde.add_argument("--cell-size", type=float, help="Cell size in meters (default 100)")
    kde.add_argument("--cutoff", dest="cutoff_bandwidths", type=float, help="Kernel cutoff in bandwidths")
    kde.add_argument("--grid", type=_grid, help="origin_x,origin_y,n_cols,n_rows[,cell_size]; default auto")
    kde.add_argument("--pgm", action="store_true", help="Also write a grayscale PGM preview")

    temporal = sub.add_parser("temporal", help="Monthly series and seasonality matrices")
    _common(temporal)
    _crashes(temporal)
    temporal.add_argument("--window-start", help="ISO start of the study window")
    temporal.add_argument("--window-end", help="ISO end of the study window")
    temporal.add_argument("--charts", action="store_true", help="Also write Plotly HTML charts")

    synth = sub.add_parser("synth", help="Synthetic fixture with planted hotspots")
    _common(synth)
    synth.add_argument("--zones", type=Path, help="Generate on these zones instead of a lattice")
    synth.add_argument("--lattice", type=int, default=10, help="Lattice side g (g x g zones)")
    synth.add_argument("--zone-size", type=float, default=1000.0, help="Lattice zone side in meters")
    synth.add_argument("--base", type=float, default=50.0, help="Expected events per zone")
    synth.add_argument("--multiplier", type=float, default=1.0, help="Hotspot intensity multiplier")
    synth.add_argument("--hotspots", type=_int_list, default=[], help="Hotspot zone indices")
    synth.add_argument("--hotspot-block", type=_int_list, help="row,col[,size] of a square hotspot block")
    synth.add_argument("--severe-prob", type=float, default=0.02, help="Background severe probability")
    synth.add_argument("--hotspot-severe-prob", type=float, help="Severe probability inside hotspots")
    synth.add_argument("--severity-zones", type=_int_list, default=[], help="Zones with elevated severity")
    synth.add_argument("--severity-prob", type=float, default=0.5, help="Severe probability in severity zones")
    synth.add_argument("--severity-intensity", type=float, help="Expected events in severity zones")

    weights = sub.add_parser("weights-export", help="Export KNN spatial weights as CSV")
    _common(weights)
    weights.add_argument("--zones", type=Path, help="Zones GeoJSON")
    weights.add_argument("-k", "--k", dest="k_neighbors", type=int, help="Nearest neighbours (default 10)")
    weights.add_argument("--symmetrize", action="store_true", default=None, help="Use w OR w^T")
    weights.add_argument("--no-row-standardize", dest="row_standardize", action="store_false", default=None)
    weights.add_argument("--zone-id-property", help="GeoJSON property holding the zone id")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {name: getattr(args, name) for name in ANALYSIS_FLAGS if getattr(args, name, None) is not None}


def run_config(args: argparse.Namespace) -> RunConfig:
    """Layer flags over the configuration file over defaults."""
    run = RunConfig.build(
        args.command,
        config_path=args.config,
        overrides=_overrides(args),
        crashes_path=getattr(args, "crashes", None),
        counts_path=getattr(args, "counts", None),
        zones_path=getattr(args, "zones", None),
        output_dir=args.output_dir,
        mapping_path=args.mapping,
        selectors=getattr(args, "selectors", None),
        variable=getattr(args, "variable", None),
        raster_pgm=getattr(args, "pgm", None),
        charts=getattr(args, "charts", None),
    )
    require = REQUIRED_PATHS[args.command]
    if args.command == "ebi-lisa":
        if run.counts_path is not None and (run.crashes_path is not None or run.selectors):
            raise ConfigurationError("--counts replaces --crashes and --filter; give one or the other")
        require += ("counts_path",) if run.counts_path is not None else ("crashes_path",)
    return run.validate(require=require)


def synth_spec(args: argparse.Namespace, analysis: AnalysisConfig) -> SynthSpec:
    hotspots = set(args.hotspots)
    if args.hotspot_block:
        if len(args.hotspot_block) not in (2, 3):
            raise ConfigurationError("--hotspot-block is row,col[,size]")
        row, col, *rest = args.hotspot_block
        size = rest[0] if rest else 3
        if min(row, col) < 0 or max(row, col) + size > args.lattice:
            raise ConfigurationError(f"--hotspot-block {args.hotspot_block} leaves the {args.lattice}x{args.lattice} lattice")
        hotspots |= block_indices(args.lattice, row, col, size)
    return SynthSpec(
        grid=args.lattice,
        cell_size=args.zone_size,
        base_intensity=args.base,
        hotspot_zones=frozenset(hotspots),
        hotspot_multiplier=args.multiplier,
        severe_probability=args.severe_prob,
        hotspot_severe_probability=args.hotspot_severe_prob,
        severity_zones=frozenset(args.severity_zones),
        severity_zone_probability=args.severity_prob,
        severity_zone_intensity=args.severity_intensity,
        seed=analysis.SEED,
        reference=analysis.reference,
        window=(analysis.WINDOW_START, analysis.WINDOW_END),
    )


def dispatch(args: argparse.Namespace) -> List[Path]:
    run = run_config(args)
    pipeline = HotspotPipeline(run)
    if args.command == "ingest":
        return pipeline.run_ingest()
    if args.command == "lisa":
        return pipeline.run_lisa()
    if args.command == "ebi-lisa":
        return pipeline.run_ebi_lisa()
    if args.command == "kde":
        return pipeline.run_kde()
    if args.command == "temporal":
        return pipeline.run_temporal()
    if args.command == "synth":
        return pipeline.run_synth(synth_spec(args, run.analysis))
    return pipeline.run_weights_export()


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name (defaults to sys.argv)

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors, matching the configuration exit code
        return int(e.code or 0)

    level = (args.log_level or AnalysisConfig.from_env().LOG_LEVEL).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)

    try:
        written = dispatch(args)
    except HotspotError as e:
        logger.error(str(e))
        return int(e.exit_code)
    except Exception:
        logger.exception("Unexpected failure")
        return int(ExitCodes.UNEXPECTED)
    logger.info(f"{args.command}: {len(written)} outputs in {args.output_dir}")
    return int(ExitCodes.SUCCESS)
