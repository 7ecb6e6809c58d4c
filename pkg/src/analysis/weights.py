"""
Sparse spatial weights over zones: directed k-nearest-neighbour graphs on
zone centroids, row standardization and CSV exchange.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import json
import logging

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.spatial import cKDTree

from ..config.constants import ErrorMessages, SuccessMessages
from ..utils.exceptions import ConfigurationError, DataError, SizingError
from ..utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

QUERY_CHUNK = 512
# Relative slack when collecting distance ties around the k-th neighbour
TIE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class SpatialWeights:
    """
    Row-indexed neighbour lists with weights.

    ``neighbors[i]`` and ``weights[i]`` are aligned arrays; no row contains ``i``.
    """

    n: int
    neighbors: Tuple[np.ndarray, ...]
    weights: Tuple[np.ndarray, ...]
    metadata: Dict[str, Any] = field(default_factory=dict)
    zone_ids: Optional[Tuple[str, ...]] = None

    @property
    def standardized(self) -> bool:
        return bool(self.metadata.get("standardized", False))

    @property
    def s0(self) -> float:
        """Sum of all weights."""
        return float(sum(row.sum() for row in self.weights))

    @property
    def cardinalities(self) -> np.ndarray:
        return np.array([len(row) for row in self.neighbors], dtype=np.int64)

    @property
    def row_sums(self) -> np.ndarray:
        return np.array([row.sum() for row in self.weights], dtype=float)

    def to_sparse(self) -> sparse.csr_matrix:
        """CSR matrix view (rows = focal zones)."""
        indptr = np.concatenate([[0], np.cumsum(self.cardinalities)])
        indices = np.concatenate(self.neighbors) if self.n else np.zeros(0, dtype=np.int64)
        data = np.concatenate(self.weights) if self.n else np.zeros(0)
        return sparse.csr_matrix((data, indices, indptr), shape=(self.n, self.n))


def _knn_rows(tree: cKDTree, centroids: np.ndarray, rows: range, k: int) -> List[np.ndarray]:
    """Neighbour indices for a block of query rows, ties broken by index."""
    n = len(centroids)
    query_k = min(k + 1, n)
    distances, _ = tree.query(centroids[rows.start:rows.stop], k=query_k)
    result = []
    for offset, i in enumerate(rows):
        # Everything within the k-th distance (self included) plus tie slack
        radius = distances[offset, -1]
        radius = radius * (1.0 + TIE_SLACK) + TIE_SLACK
        candidates = np.array(tree.query_ball_point(centroids[i], radius), dtype=np.int64)
        candidates = candidates[candidates != i]
        d = np.hypot(*(centroids[candidates] - centroids[i]).T)
        order = np.lexsort((candidates, d))
        result.append(candidates[order[:k]])
    return result


def knn_weights(
    centroids: np.ndarray,
    k: int,
    zone_ids: Optional[Sequence[str]] = None,
    workers: int = 1,
) -> SpatialWeights:
    """
    Directed binary k-nearest-neighbour weights on centroids.

    Neighbours are ordered by (distance, zone index), so equal distances
    resolve to the smaller index.

    Args:
        centroids: Array of shape (n, 2)
        k: Neighbours per zone
        zone_ids: Optional zone ids carried for export
        workers: Threads over fixed query blocks

    Returns:
        SpatialWeights with binary weights, not standardized
    """
    centroids = np.asarray(centroids, dtype=float).reshape(-1, 2)
    n = len(centroids)
    if k < 1 or n <= k:
        raise SizingError(ErrorMessages.TOO_FEW_ZONES.value.format(n=n, k=k))
    tree = cKDTree(centroids)
    blocks = ReproHelpers.chunk_ranges(n, QUERY_CHUNK)
    rows: List[np.ndarray] = []
    for block in ReproHelpers.parallel_map(lambda r: _knn_rows(tree, centroids, r, k), blocks, workers):
        rows.extend(block)

    logger.info(SuccessMessages.WEIGHTS_BUILT.value.format(n=n, k=k, standardized=False))
    return SpatialWeights(
        n=n,
        neighbors=tuple(row.astype(np.int64) for row in rows),
        weights=tuple(np.ones(len(row)) for row in rows),
        metadata={"method": "knn", "k": int(k), "standardized": False, "symmetrized": False,
                  "representative_point": "centroid"},
        zone_ids=tuple(zone_ids) if zone_ids is not None else None,
    )


def row_standardize(w: SpatialWeights) -> SpatialWeights:
    """
    Divide each weight by its row sum. Idempotent; empty rows stay empty.
    """
    if w.standardized:
        return w
    weights = tuple(row / row.sum() if len(row) else row.copy() for row in w.weights)
    return replace(w, weights=weights, metadata={**w.metadata, "standardized": True})


def symmetrize(w: SpatialWeights) -> SpatialWeights:
    """Binary union w OR w^T (off by default for KNN)."""
    matrix = w.to_sparse()
    union = ((matrix + matrix.T) > 0).astype(float).tocsr()
    union.sort_indices()
    neighbors = tuple(union.indices[union.indptr[i]:union.indptr[i + 1]].astype(np.int64) for i in range(w.n))
    weights = tuple(np.ones(len(row)) for row in neighbors)
    return replace(w, neighbors=neighbors, weights=weights,
                   metadata={**w.metadata, "symmetrized": True, "standardized": False})


def write_weights_csv(w: SpatialWeights, path: Path) -> Path:
    """
    Export as ``from_id,to_id,weight`` plus a ``.header.json`` sidecar.

    Args:
        w: Weights to export (zone ids default to indices)
        path: Destination CSV

    Returns:
        Path of the CSV
    """
    ids = w.zone_ids or tuple(str(i) for i in range(w.n))
    lines = ["from_id,to_id,weight"]
    for i in range(w.n):
        for j, weight in zip(w.neighbors[i], w.weights[i]):
            lines.append(f"{ids[i]},{ids[j]},{weight:.17g}")
    path = Path(path)
    ReproHelpers.write_text(path, "\n".join(lines) + "\n")
    header = {**w.metadata, "n": w.n, "zone_ids": list(ids)}
    ReproHelpers.write_json(path.with_name(path.stem + ".header.json"), header)
    return path


def read_weights_csv(path: Path) -> SpatialWeights:
    """Import weights written by :func:`write_weights_csv`."""
    path = Path(path)
    header_path = path.with_name(path.stem + ".header.json")
    for required in (path, header_path):
        if not required.exists():
            raise ConfigurationError(ErrorMessages.FILE_NOT_FOUND.value.format(path=required))
    header = json.loads(header_path.read_text(encoding="utf-8"))
    ids = [str(zone_id) for zone_id in header["zone_ids"]]
    position = {zone_id: i for i, zone_id in enumerate(ids)}
    table = pd.read_csv(path, dtype={"from_id": str, "to_id": str, "weight": float}, keep_default_na=False)
    neighbors: List[List[int]] = [[] for _ in ids]
    weights: List[List[float]] = [[] for _ in ids]
    for row in table.itertuples(index=False):
        if row.from_id not in position or row.to_id not in position:
            bad = row.from_id if row.from_id not in position else row.to_id
            raise DataError(ErrorMessages.UNKNOWN_ZONE_ID.value.format(zone_id=bad))
        neighbors[position[row.from_id]].append(position[row.to_id])
        weights[position[row.from_id]].append(float(row.weight))
    metadata = {key: value for key, value in header.items() if key not in ("n", "zone_ids")}
    return SpatialWeights(
        n=len(ids),
        neighbors=tuple(np.array(row, dtype=np.int64) for row in neighbors),
        weights=tuple(np.array(row, dtype=float) for row in weights),
        metadata=metadata,
        zone_ids=tuple(ids),
    )
