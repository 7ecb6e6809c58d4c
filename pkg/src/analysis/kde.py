"""
Two-dimensional Gaussian kernel density estimation on a regular planar grid.

Density at a cell centre c:
    f(c) = (1/n) * sum_p (1 / (2 pi h^2)) * exp(-|c - p|^2 / (2 h^2))
with kernel contributions dropped beyond ``cutoff * h``. Cells are evaluated
in fixed tiles so the result never depends on the worker count.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple
import logging
import math

import numpy as np

from ..config.constants import ErrorMessages
from ..utils.exceptions import ConfigurationError, DegeneracyError, DomainError, SizingError
from ..utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

KERNEL_GAUSSIAN = "gaussian"
DEFAULT_CUTOFF = 6.0
DEFAULT_MAX_CELLS = 4_000_000
TILE_CELLS = 32
POINT_CHUNK = 256


@dataclass(frozen=True)
class GridSpec:
    """
    Regular raster grid in projected meters.

    Row 0 is the southernmost row; cell (r, c) has its lower-left corner at
    ``(origin_x + c * cell_size, origin_y + r * cell_size)``.
    """

    origin_x: float
    origin_y: float
    cell_size: float
    n_cols: int
    n_rows: int

    def __post_init__(self):
        if not (self.cell_size > 0 and math.isfinite(self.cell_size)):
            raise ConfigurationError(
                ErrorMessages.PARAMETER_RANGE.value.format(name="cell_size", value=self.cell_size, allowed="(0, inf)")
            )
        if self.n_cols < 1 or self.n_rows < 1:
            raise ConfigurationError(
                ErrorMessages.PARAMETER_RANGE.value.format(
                    name="grid", value=f"{self.n_cols}x{self.n_rows}", allowed="at least 1x1"
                )
            )

    @property
    def cells(self) -> int:
        return self.n_cols * self.n_rows

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) of the cell edges."""
        return (
            self.origin_x,
            self.origin_y,
            self.origin_x + self.n_cols * self.cell_size,
            self.origin_y + self.n_rows * self.cell_size,
        )

    def check_size(self, max_cells: int = DEFAULT_MAX_CELLS) -> None:
        if self.cells > max_cells:
            raise SizingError(ErrorMessages.GRID_TOO_LARGE.value.format(cells=self.cells, cap=max_cells))

    def column_centers(self) -> np.ndarray:
        return self.origin_x + (np.arange(self.n_cols) + 0.5) * self.cell_size

    def row_centers(self) -> np.ndarray:
        return self.origin_y + (np.arange(self.n_rows) + 0.5) * self.cell_size


@dataclass(frozen=True, eq=False)
class KdeGrid:
    """Density raster in 1/m^2, shape (n_rows, n_cols), row 0 south."""

    spec: GridSpec
    values: np.ndarray
    bandwidth: float
    kernel: str = KERNEL_GAUSSIAN

    @property
    def mass(self) -> float:
        """Integral of the density over the grid."""
        return float(self.values.sum() * self.spec.cell_size ** 2)


def _as_points(points: Sequence) -> np.ndarray:
    array = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.isfinite(array).all():
        raise DomainError("Kernel density points must be finite")
    return array


def silverman_bandwidth(points: Sequence) -> float:
    """
    Silverman's rule with pooled axes.

    h = 1.06 * min(sigma, IQR / 1.34) * n^(-1/5), where sigma and IQR are the
    means of the per-axis sample standard deviations and interquartile
    ranges. When the robust term vanishes, sigma alone is used.

    Raises:
        DomainError: no points
        DegeneracyError: a single point or all points identical
    """
    points = _as_points(points)
    n = len(points)
    if n == 0:
        raise DomainError(ErrorMessages.EMPTY_POINTS.value)
    if n < 2 or np.ptp(points, axis=0).max() == 0.0:
        raise DegeneracyError(ErrorMessages.IDENTICAL_POINTS.value.format(n=n))
    sigma = float(points.std(axis=0, ddof=1).mean())
    upper, lower = np.percentile(points, [75.0, 25.0], axis=0)
    iqr = float((upper - lower).mean())
    spread = min(sigma, iqr / 1.34)
    if spread <= 0.0:
        spread = sigma
    return 1.06 * spread * n ** (-0.2)


def auto_grid(
    points: Sequence,
    bandwidth: float,
    cell_size: float,
    pad_bandwidths: float = DEFAULT_CUTOFF,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> GridSpec:
    """Grid covering the points' extent padded by ``pad_bandwidths * bandwidth``."""
    points = _as_points(points)
    if len(points) == 0:
        raise DomainError(ErrorMessages.EMPTY_POINTS.value)
    pad = pad_bandwidths * bandwidth
    low = points.min(axis=0) - pad
    high = points.max(axis=0) + pad
    n_cols = max(1, int(math.ceil((high[0] - low[0]) / cell_size)))
    n_rows = max(1, int(math.ceil((high[1] - low[1]) / cell_size)))
    spec = GridSpec(float(low[0]), float(low[1]), float(cell_size), n_cols, n_rows)
    spec.check_size(max_cells)
    return spec


def _tile_density(
    spec: GridSpec,
    tile: Tuple[range, range],
    points: np.ndarray,
    bandwidth: float,
    radius: float,
) -> np.ndarray:
    """Unnormalized kernel sums for one tile; points sorted by x."""
    rows, cols = tile
    xs = spec.column_centers()[cols.start:cols.stop]
    ys = spec.row_centers()[rows.start:rows.stop]
    acc = np.zeros((len(ys), len(xs)))

    lo = np.searchsorted(points[:, 0], xs[0] - radius, side="left")
    hi = np.searchsorted(points[:, 0], xs[-1] + radius, side="right")
    near = points[lo:hi]
    near = near[(near[:, 1] >= ys[0] - radius) & (near[:, 1] <= ys[-1] + radius)]
    if len(near) == 0:
        return acc

    radius_sq = radius * radius
    scale = -0.5 / (bandwidth * bandwidth)
    for start in range(0, len(near), POINT_CHUNK):
        chunk = near[start:start + POINT_CHUNK]
        dx = xs[None, None, :] - chunk[:, 0, None, None]
        dy = ys[None, :, None] - chunk[:, 1, None, None]
        d2 = dx * dx + dy * dy
        acc += np.where(d2 <= radius_sq, np.exp(d2 * scale), 0.0).sum(axis=0)
    return acc


def kde_grid(
    points: Sequence,
    bandwidth: float,
    spec: GridSpec,
    cutoff: float = DEFAULT_CUTOFF,
    workers: int = 1,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> KdeGrid:
    """
    Gaussian KDE evaluated at every cell centre of ``spec``.

    Args:
        points: Planar points, shape (n, 2), meters
        bandwidth: Kernel bandwidth h in meters
        spec: Target grid
        cutoff: Truncation radius in bandwidths
        workers: Threads over fixed tiles
        max_cells: Cell cap

    Returns:
        KdeGrid

    Raises:
        DomainError: no points
        ConfigurationError: non-positive bandwidth
        SizingError: grid over the cell cap
    """
    points = _as_points(points)
    if len(points) == 0:
        raise DomainError(ErrorMessages.EMPTY_POINTS.value)
    if not (bandwidth > 0 and math.isfinite(bandwidth)):
        raise ConfigurationError(
            ErrorMessages.PARAMETER_RANGE.value.format(name="bandwidth", value=bandwidth, allowed="(0, inf)")
        )
    spec.check_size(max_cells)

    ordered = points[np.lexsort((points[:, 1], points[:, 0]))]
    radius = cutoff * bandwidth
    tiles = [
        (rows, cols)
        for rows in ReproHelpers.chunk_ranges(spec.n_rows, TILE_CELLS)
        for cols in ReproHelpers.chunk_ranges(spec.n_cols, TILE_CELLS)
    ]
    sums = ReproHelpers.parallel_map(
        lambda tile: _tile_density(spec, tile, ordered, bandwidth, radius), tiles, workers
    )

    values = np.zeros((spec.n_rows, spec.n_cols))
    for (rows, cols), block in zip(tiles, sums):
        values[rows.start:rows.stop, cols.start:cols.stop] = block
    values *= 1.0 / (2.0 * math.pi * bandwidth * bandwidth * len(points))

    grid = KdeGrid(spec=spec, values=values, bandwidth=float(bandwidth))
    logger.info(
        f"KDE on {spec.n_cols}x{spec.n_rows} grid from {len(points)} points, "
        f"bandwidth {bandwidth:.2f} m, mass {grid.mass:.4f}"
    )
    return grid


def estimate(
    points: Sequence,
    cell_size: float,
    bandwidth: Optional[float] = None,
    spec: Optional[GridSpec] = None,
    cutoff: float = DEFAULT_CUTOFF,
    workers: int = 1,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> KdeGrid:
    """KDE with Silverman's bandwidth and an automatic grid unless given."""
    h = bandwidth if bandwidth is not None else silverman_bandwidth(points)
    grid_spec = spec if spec is not None else auto_grid(points, h, cell_size, cutoff, max_cells)
    return kde_grid(points, h, grid_spec, cutoff, workers, max_cells)
