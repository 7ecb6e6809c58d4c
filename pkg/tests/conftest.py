"""
Shared fixtures: small zone layouts, hand-built weights and random data.
"""

from typing import List, Sequence

import numpy as np
import pytest

from src.analysis.weights import SpatialWeights, knn_weights, row_standardize
from src.geometry.polygons import ZonePolygon


def square(zone_id: str, x0: float, y0: float, size: float = 1.0, holes: Sequence = ()) -> ZonePolygon:
    ring = [(x0, y0), (x0 + size, y0), (x0 + size, y0 + size), (x0, y0 + size)]
    return ZonePolygon(zone_id, ring, tuple(holes))


def lattice(grid: int, size: float = 1.0) -> List[ZonePolygon]:
    """Square zones ``Z0000..`` numbered row by row from the south-west."""
    return [square(f"Z{row * grid + col:04d}", col * size, row * size, size)
            for row in range(grid) for col in range(grid)]


def weights_from_lists(neighbors: Sequence[Sequence[int]], standardize: bool = True) -> SpatialWeights:
    w = SpatialWeights(
        n=len(neighbors),
        neighbors=tuple(np.asarray(row, dtype=np.int64) for row in neighbors),
        weights=tuple(np.ones(len(row)) for row in neighbors),
        metadata={"method": "manual", "standardized": False},
    )
    return row_standardize(w) if standardize else w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def four_cycle():
    """Ring 0-1-2-3-0, row-standardized."""
    return weights_from_lists([[1, 3], [0, 2], [1, 3], [0, 2]])


@pytest.fixture
def two_components():
    """Zones {0, 1} and {2, 3} neighbour only each other."""
    return weights_from_lists([[1], [0], [3], [2]])


@pytest.fixture
def lattice_weights():
    """Rook-like KNN (k=4) over a 6x6 lattice of unit squares."""
    centres = np.array([(col + 0.5, row + 0.5) for row in range(6) for col in range(6)])
    return row_standardize(knn_weights(centres, 4))


@pytest.fixture
def random_weights(rng):
    centres = rng.uniform(0, 1000, size=(40, 2))
    return row_standardize(knn_weights(centres, 5))
