"""
Constants and enums for the crash hotspot engine.
Defines circumstance flags, cluster labels, exit codes, messages and format constants.
"""

from enum import Enum, IntEnum
from typing import List, Dict


class CrashFlags(Enum):
    """Circumstance flags extracted from collision records."""

    PEDESTRIAN = "pedestrian"
    ALCOHOL = "alcohol"
    ANIMAL = "animal"
    PARKED_VEHICLE = "parked_vehicle"
    DISTRACTED = "distracted"
    OFF_ROAD = "off_road"
    POOR_LIGHTING = "poor_lighting"
    NO_TRAFFIC_CONTROL = "no_traffic_control"
    FIXED_OBJECT = "fixed_object"

    @classmethod
    def get_all_types(cls) -> List[str]:
        """Get all flag names in canonical column order."""
        return [flag.value for flag in cls]

    @classmethod
    def get_display_names(cls) -> Dict[str, str]:
        """Get flag display names for charts and summaries."""
        return {
            cls.PEDESTRIAN.value: "Pedestrian involved",
            cls.ALCOHOL.value: "Alcohol involved",
            cls.ANIMAL.value: "Animal",
            cls.PARKED_VEHICLE.value: "Parked vehicle",
            cls.DISTRACTED.value: "Driver distraction",
            cls.OFF_ROAD.value: "Off road",
            cls.POOR_LIGHTING.value: "Poor lighting",
            cls.NO_TRAFFIC_CONTROL.value: "No traffic control",
            cls.FIXED_OBJECT.value: "Fixed object",
        }


class Quadrant(Enum):
    """Moran scatterplot quadrants and the non-significant label."""

    HH = "HH"
    HL = "HL"
    LH = "LH"
    LL = "LL"
    NOT_SIGNIFICANT = "NotSignificant"


class ExitCodes(IntEnum):
    """Stable process exit codes of the command-line front-end."""

    SUCCESS = 0
    UNEXPECTED = 1
    CONFIGURATION = 2
    DATA = 3
    DEGENERACY = 4


class RandomStreams(IntEnum):
    """Stream identifiers mixed into seed sequences so stages never share draws."""

    GLOBAL_REPLICATE = 1
    LOCAL_ZONE = 2
    SYNTH_ZONE = 3


class ErrorMessages(Enum):
    """Error message constants for user feedback."""

    MISSING_COLUMNS = "Missing mapped columns in CSV header: {columns}"
    UNMAPPED_FIELDS = "Column mapping does not map required fields: {fields}"
    DUPLICATE_FIELD = "Logical field mapped more than once: {field}"
    UNKNOWN_FLAG = "Unknown flag or selector: {name}. Use one of: {allowed}"
    UNKNOWN_CONFIG_KEY = "Unknown configuration keys: {keys}"
    FILE_NOT_FOUND = "Input file does not exist: {path}"
    PARAMETER_RANGE = "Parameter {name}={value} is outside {allowed}"
    NON_FINITE_COORDINATE = "Non-finite or out-of-range coordinate at index {index}: ({lon}, {lat})"
    DEGENERATE_RING = "Zone {zone_id}: ring has {count} vertices, at least 4 required"
    ZERO_AREA = "Zone {zone_id}: polygon has zero total area"
    UNSUPPORTED_GEOMETRY = "Feature {index}: unsupported geometry type {kind}"
    MISSING_ZONE_ID = "Feature {index}: property {key!r} is missing"
    TOO_FEW_ZONES = "Need more zones than neighbours: n={n}, k={k}"
    ZERO_VARIANCE = "Zero variance: all {n} zone values equal {value}"
    SEVERE_EXCEEDS_TOTAL = "Zone {zone}: severe count {severe} exceeds total {total}"
    NEGATIVE_COUNT = "Zone {zone}: counts must be non-negative integers"
    EMPTY_POINTS = "Kernel density needs at least one point"
    IDENTICAL_POINTS = "All {n} points are identical; bandwidth is undefined"
    GRID_TOO_LARGE = "Grid of {cells} cells exceeds the cap of {cap} cells"
    UNWRITABLE_OUTPUT = "Cannot write output {path}: {error}"
    INVALID_RASTER = "Invalid ESRI ASCII grid {path}: {error}"
    DIMENSION_MISMATCH = "Values have {values} entries but weights cover {zones} zones"
    UNKNOWN_ZONE_ID = "Weights file references unknown zone id {zone_id}"
    MISSING_ZONE_COUNTS = "Severity counts missing for {count} zones (first {zone_id})"
    DUPLICATE_ZONE_COUNTS = "Severity counts list zone {zone_id} more than once"


class SuccessMessages(Enum):
    """Success message constants for user feedback."""

    DATA_LOADED = "{count} records loaded, {quarantined} quarantined"
    ZONES_LOADED = "{count} zone polygons loaded ({zones} distinct zones)"
    ZONES_ASSIGNED = "{assigned} records assigned to zones, {unassigned} unassigned"
    WEIGHTS_BUILT = "KNN weights built: n={n}, k={k}, standardized={standardized}"
    MORAN_DONE = "Global Moran's I={value:.6f} (expected {expected:.6f}, pseudo p={p:.4f})"
    LISA_DONE = "LISA clusters: {counts}"
    OUTPUT_WRITTEN = "Wrote {path}"


# Canonical normalized record columns
RECORD_COLUMNS: List[str] = ["report_id", "timestamp", "lon", "lat", "severe"] + CrashFlags.get_all_types()

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%S"
EARTH_RADIUS_M = 6_371_000.0
DEFAULT_ZONE_ID_PROPERTY = "GEOID"
ASC_NODATA_VALUE = -9999

# Formula variants stamped into every analysis report
FORMULA_VARIANTS: Dict[str, str] = {
    "moran_normalization": "I = (n/S0) * sum_ij w_ij z_i z_j / sum_i z_i^2",
    "local_moran_scaling": "I_i = (z_i/m2) * sum_j w_ij z_j, m2 = sum z^2 / n",
    "pseudo_p": "one-sided toward the observed tail relative to the permutation expectation",
    "local_permutation": "conditional (focal value held fixed)",
    "global_rate": "pooled-sum smoothing (sum severe + 1) / (sum total + 2)",
    "ebi_standardization": "population standard deviation (divide by n)",
    "knn_representative_point": "area-weighted zone centroid",
    "knn_tie_break": "smaller zone index first",
}
