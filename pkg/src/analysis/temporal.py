"""
Calendar aggregation of collision records: monthly series with explicit
zeros, the years x 12 seasonality matrix and per-circumstance monthly counts.

Timestamps are bucketed as stored (dataset-local time, no timezone conversion).
"""

from datetime import datetime
from pathlib import Path
from typing import Dict, List, Sequence, Tuple
import logging

import pandas as pd

from ..config.constants import CrashFlags
from ..utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ["year", "month", "count"]
MONTHS = list(range(1, 13))


def _month_index(window: Tuple[datetime, datetime]) -> pd.PeriodIndex:
    start, end = window
    return pd.period_range(pd.Period(start, freq="M"), pd.Period(end, freq="M"), freq="M")


def _in_window(records: pd.DataFrame, window: Tuple[datetime, datetime]) -> pd.DataFrame:
    start, end = window
    stamps = records["timestamp"]
    return records[(stamps >= pd.Timestamp(start)) & (stamps <= pd.Timestamp(end))]


def _tally(records: pd.DataFrame, months: pd.PeriodIndex, columns: Sequence[str]) -> pd.DataFrame:
    periods = records["timestamp"].dt.to_period("M")
    table = pd.DataFrame({"period": periods})
    for column in columns:
        table[column] = 1 if column == "count" else records[column].astype(int).to_numpy()
    counts = table.groupby("period")[list(columns)].sum().reindex(months, fill_value=0)
    counts = counts.astype("int64")
    counts.insert(0, "month", [period.month for period in months])
    counts.insert(0, "year", [period.year for period in months])
    return counts.reset_index(drop=True)


def monthly_series(records: pd.DataFrame, window: Tuple[datetime, datetime]) -> pd.DataFrame:
    """
    Collisions per calendar month over the whole window.

    Args:
        records: Canonical record frame
        window: (start, end) of the study window, inclusive

    Returns:
        Frame (year, month, count) with one row per month, gaps filled with 0
    """
    months = _month_index(window)
    series = _tally(_in_window(records, window), months, ["count"])
    logger.info(f"Monthly series: {len(series)} months, {int(series['count'].sum())} collisions")
    return series


def seasonal_matrix(series: pd.DataFrame, value: str = "count") -> pd.DataFrame:
    """Pivot a monthly series into a years x 12 matrix (index year, columns 1..12)."""
    matrix = series.pivot_table(index="year", columns="month", values=value, aggfunc="sum", fill_value=0)
    matrix = matrix.reindex(columns=MONTHS, fill_value=0).astype("int64")
    matrix.columns.name = "month"
    return matrix


def flag_monthly_series(records: pd.DataFrame, window: Tuple[datetime, datetime]) -> pd.DataFrame:
    """Monthly totals plus severe and per-flag counts (year, month, count, severe, <flags>)."""
    months = _month_index(window)
    return _tally(_in_window(records, window), months, ["count", "severe"] + CrashFlags.get_all_types())


def annual_totals(matrix: pd.DataFrame) -> pd.Series:
    return matrix.sum(axis=1)


def monthly_profile(matrix: pd.DataFrame) -> pd.Series:
    """Mean count per calendar month across years."""
    return matrix.mean(axis=0)


def temporal_report(matrix: pd.DataFrame, severe_matrix: pd.DataFrame) -> Dict[str, Dict[str, float]]:
    """
    Annual totals and the mean monthly profile, for all and for severe collisions.

    Args:
        matrix: Seasonal matrix of all collisions
        severe_matrix: Seasonal matrix of severe collisions

    Returns:
        Mapping of report section to {year or month: value}
    """
    return {
        "annual_totals": {str(year): int(total) for year, total in annual_totals(matrix).items()},
        "annual_severe": {str(year): int(total) for year, total in annual_totals(severe_matrix).items()},
        "monthly_profile": {str(month): float(mean) for month, mean in monthly_profile(matrix).items()},
        "monthly_profile_severe": {
            str(month): float(mean) for month, mean in monthly_profile(severe_matrix).items()
        },
    }


def write_series_csv(series: pd.DataFrame, path: Path) -> Path:
    return ReproHelpers.write_text(Path(path), series.to_csv(index=False, lineterminator="\n"))


def write_matrix_csv(matrix: pd.DataFrame, path: Path) -> Path:
    """Write the pivot as ``year,1,...,12``."""
    lines: List[str] = ["year," + ",".join(str(month) for month in MONTHS)]
    for year, row in matrix.iterrows():
        lines.append(f"{year}," + ",".join(str(int(row[month])) for month in MONTHS))
    return ReproHelpers.write_text(Path(path), "\n".join(lines) + "\n")
