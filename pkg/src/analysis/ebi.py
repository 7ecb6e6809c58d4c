"""
Empirical Bayes Index severity: Laplace-smoothed severity rates, binomial
standard deviations, the pooled global rate and the standardized index that
feeds rate-based LISA.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union
import logging

import numpy as np
import pandas as pd

from ..config.constants import ErrorMessages
from ..utils.exceptions import ConfigurationError, DataError, DegeneracyError, DomainError
from ..utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

GLOBAL_RATE_READING = "pooled-sum smoothing (sum severe + 1) / (sum total + 2)"
STANDARDIZATION = "population standard deviation (divide by n)"


@dataclass(frozen=True)
class SeverityInput:
    """Severe and total collision counts of one zone."""

    zone_id: str
    severe: int
    total: int

    def __post_init__(self):
        _check_counts(self.zone_id, self.severe, self.total)


@dataclass(frozen=True, eq=False)
class EbiVector:
    """Per-zone EBI columns plus the scalar global rate."""

    zone_ids: List[str]
    severe: np.ndarray
    total: np.ndarray
    severity_rate: np.ndarray
    severity_rate_std: np.ndarray
    ebi: np.ndarray
    ebi_standardized: np.ndarray
    global_severity_rate: float
    notes: Dict[str, str] = field(default_factory=lambda: {
        "global_rate": GLOBAL_RATE_READING,
        "ebi_standardization": STANDARDIZATION,
    })

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "zone_id": self.zone_ids,
                "rate": self.severity_rate,
                "std": self.severity_rate_std,
                "ebi": self.ebi,
                "ebi_standardized": self.ebi_standardized,
            }
        )

    def report(self) -> Dict[str, Any]:
        """Scalar summary written next to the per-zone table."""
        return {
            "zones": len(self.zone_ids),
            "global_severity_rate": self.global_severity_rate,
            "severe_total": int(self.severe.sum()),
            "collisions_total": int(self.total.sum()),
            "ebi_mean": float(self.ebi.mean()),
            "ebi_std": float(self.ebi.std()),
            "ebi_standardized_mean": float(self.ebi_standardized.mean()),
            "ebi_standardized_std": float(self.ebi_standardized.std()),
            "formula_variants": dict(self.notes),
        }


def _check_counts(zone: Any, severe: Any, total: Any) -> None:
    if int(severe) != severe or int(total) != total or severe < 0 or total < 0:
        raise DomainError(ErrorMessages.NEGATIVE_COUNT.value.format(zone=zone))
    if severe > total:
        raise DomainError(ErrorMessages.SEVERE_EXCEEDS_TOTAL.value.format(zone=zone, severe=severe, total=total))


def smoothed_rate(severe: Union[int, np.ndarray], total: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Laplace-smoothed severity rate (severe + 1) / (total + 2).

    Raises:
        DomainError: severe > total or negative counts
    """
    severe_arr, total_arr = np.asarray(severe), np.asarray(total)
    for index, (s, t) in enumerate(zip(severe_arr.ravel(), total_arr.ravel())):
        _check_counts(index, s, t)
    rate = (severe_arr + 1.0) / (total_arr + 2.0)
    return float(rate) if rate.ndim == 0 else rate


def rate_std(rate: Union[float, np.ndarray], total: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    """Binomial standard deviation sqrt(rate (1 - rate) / (total + 2))."""
    rate = np.asarray(rate, dtype=float)
    if np.any((rate <= 0.0) | (rate >= 1.0)):
        raise DomainError(ErrorMessages.PARAMETER_RANGE.value.format(name="rate", value=rate, allowed="(0, 1)"))
    std = np.sqrt(rate * (1.0 - rate) / (np.asarray(total, dtype=float) + 2.0))
    return float(std) if std.ndim == 0 else std


def global_rate(inputs: Sequence[SeverityInput]) -> float:
    """Pooled global rate: one smoothing pair on the summed counts."""
    if not inputs:
        raise DataError("Global severity rate needs at least one zone")
    severe = sum(int(item.severe) for item in inputs)
    total = sum(int(item.total) for item in inputs)
    return (severe + 1.0) / (total + 2.0)


def ebi_transform(inputs: Sequence[SeverityInput]) -> EbiVector:
    """
    Standardized Empirical Bayes Index per zone.

    ebi_i = (rate_i - global) / std_i, then centered and divided by the
    population standard deviation across zones.

    Args:
        inputs: Severity counts per zone, at least two

    Returns:
        EbiVector

    Raises:
        DegeneracyError: fewer than two zones or constant ebi
    """
    if len(inputs) < 2:
        raise DegeneracyError("EBI standardization needs at least two zones")
    severe = np.array([item.severe for item in inputs], dtype=np.int64)
    total = np.array([item.total for item in inputs], dtype=np.int64)
    rate = smoothed_rate(severe, total)
    std = rate_std(rate, total)
    pooled = global_rate(inputs)
    ebi = (rate - pooled) / std

    spread = float(ebi.std())
    if np.ptp(ebi) == 0.0 or spread == 0.0:
        raise DegeneracyError(ErrorMessages.ZERO_VARIANCE.value.format(n=len(ebi), value=float(ebi[0])))
    standardized = (ebi - ebi.mean()) / spread
    logger.info(f"EBI computed for {len(inputs)} zones, global severity rate {pooled:.6f}")
    return EbiVector(
        zone_ids=[item.zone_id for item in inputs],
        severe=severe,
        total=total,
        severity_rate=rate,
        severity_rate_std=std,
        ebi=ebi,
        ebi_standardized=standardized,
        global_severity_rate=float(pooled),
    )


def inputs_from_frame(frame: pd.DataFrame) -> List[SeverityInput]:
    """Severity inputs from a frame with zone_id, severe and total columns."""
    missing = [column for column in ("zone_id", "severe", "total") if column not in frame.columns]
    if missing:
        raise ConfigurationError(ErrorMessages.MISSING_COLUMNS.value.format(columns=", ".join(missing)))
    return [
        SeverityInput(str(row.zone_id), int(row.severe), int(row.total))
        for row in frame.itertuples(index=False)
    ]


def read_severity_csv(path: Path) -> List[SeverityInput]:
    """Read ``zone_id,severe,total`` rows."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=path))
    frame = pd.read_csv(path, dtype={"zone_id": str}, keep_default_na=False)
    try:
        return inputs_from_frame(frame)
    except ValueError as e:
        raise DataError(f"Invalid severity counts in {path}: {e}") from e


def write_ebi_csv(vector: EbiVector, path: Path, digits: Optional[int] = 12) -> Path:
    """Write ``zone_id,rate,std,ebi,ebi_standardized`` with fixed float formatting."""
    lines = ["zone_id,rate,std,ebi,ebi_standardized"]
    for i, zone_id in enumerate(vector.zone_ids):
        values = (vector.severity_rate[i], vector.severity_rate_std[i], vector.ebi[i], vector.ebi_standardized[i])
        lines.append(",".join([zone_id] + [ReproHelpers.format_float(v, digits) for v in values]))
    return ReproHelpers.write_text(Path(path), "\n".join(lines) + "\n")
