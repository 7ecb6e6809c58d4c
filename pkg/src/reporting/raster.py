"""
Raster writers for density grids: ESRI ASCII grid and grayscale PGM previews.
"""

from pathlib import Path
from typing import Dict, List, Optional
import logging

import numpy as np

from ..analysis.kde import GridSpec, KdeGrid
from ..config.constants import ASC_NODATA_VALUE, ErrorMessages
from ..utils.exceptions import ConfigurationError, DataError
from ..utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

ASC_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
PGM_GRAY = 128


def ascii_grid_text(grid: KdeGrid) -> str:
    """
    ESRI ASCII grid rendering.

    Six header lines, then rows from north to south with values in
    scientific notation to 9 significant digits.
    """
    spec = grid.spec
    lines = [
        f"ncols {spec.n_cols}",
        f"nrows {spec.n_rows}",
        f"xllcorner {float(spec.origin_x)!r}",
        f"yllcorner {float(spec.origin_y)!r}",
        f"cellsize {float(spec.cell_size)!r}",
        f"NODATA_value {ASC_NODATA_VALUE}",
    ]
    for row in grid.values[::-1]:
        lines.append(" ".join(f"{value:.8e}" for value in row))
    return "\n".join(lines) + "\n"


def pgm_bytes(grid: KdeGrid) -> bytes:
    """Binary PGM (P5), min-max normalized to 0..255; constant grids render gray."""
    values = grid.values[::-1]
    low, high = float(values.min()), float(values.max())
    if high > low:
        pixels = np.rint((values - low) / (high - low) * 255.0)
    else:
        pixels = np.full(values.shape, PGM_GRAY)
    header = f"P5\n{grid.spec.n_cols} {grid.spec.n_rows}\n255\n".encode("ascii")
    return header + pixels.astype(np.uint8).tobytes()


def export_raster(grid: KdeGrid, path: Path, fmt: Optional[str] = None) -> Path:
    """
    Write a density grid.

    Args:
        grid: Density grid
        path: Destination file
        fmt: "asc" or "pgm"; inferred from the suffix when omitted

    Returns:
        Path written
    """
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "asc").lower()
    if fmt == "asc":
        return ReproHelpers.write_text(path, ascii_grid_text(grid))
    if fmt == "pgm":
        return ReproHelpers.write_bytes(path, pgm_bytes(grid))
    raise ConfigurationError(ErrorMessages.PARAMETER_RANGE.value.format(name="format", value=fmt, allowed="{asc, pgm}"))


def read_ascii_grid(path: Path, bandwidth: float = float("nan"), kernel: str = "gaussian") -> KdeGrid:
    """
    Read an ESRI ASCII grid back into a KdeGrid (row 0 south).

    Raises:
        ConfigurationError: missing file
        DataError: malformed header or data rows
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=path))
    lines: List[str] = path.read_text(encoding="utf-8").splitlines()
    header: Dict[str, str] = {}
    try:
        for line in lines[: len(ASC_HEADER_KEYS)]:
            key, value = line.split()
            header[key.lower()] = value
        missing = [key for key in ASC_HEADER_KEYS if key not in header]
        if missing:
            raise ValueError(f"missing header keys {missing}")
        n_cols, n_rows = int(header["ncols"]), int(header["nrows"])
        rows = [np.array(line.split(), dtype=float) for line in lines[len(ASC_HEADER_KEYS):] if line.strip()]
        if len(rows) != n_rows or any(len(row) != n_cols for row in rows):
            raise ValueError(f"expected {n_rows} rows of {n_cols} values")
        spec = GridSpec(
            origin_x=float(header["xllcorner"]),
            origin_y=float(header["yllcorner"]),
            cell_size=float(header["cellsize"]),
            n_cols=n_cols,
            n_rows=n_rows,
        )
    except ValueError as e:
        raise DataError(ErrorMessages.INVALID_RASTER.value.format(path=path, error=e)) from e
    values = np.vstack(rows)[::-1].copy()
    values[values == float(header["nodata_value"])] = np.nan
    return KdeGrid(spec=spec, values=values, bandwidth=bandwidth, kernel=kernel)
