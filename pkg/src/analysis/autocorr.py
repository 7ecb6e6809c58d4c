"""
Spatial autocorrelation: global and local Moran's I, permutation pseudo
p-values and LISA cluster classification.

Formulas:
    z_i = x_i - mean(x),  m2 = sum(z^2) / n
    I   = (n / S0) * sum_ij w_ij z_i z_j / sum_i z_i^2
    I_i = (z_i / m2) * sum_j w_ij z_j

so that sum_i I_i == S0 * I (mean(I_i) == I for row-standardized weights).

Pseudo p-values are one-sided toward the tail the observed value lies in,
relative to the exact permutation expectation. Every replicate (global) and
every zone (local) draws from its own counter-based substream, so results do
not depend on the worker count.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence
import logging

import numpy as np
import pandas as pd

from ..config.constants import ErrorMessages, Quadrant, RandomStreams, SuccessMessages
from ..utils.exceptions import ConfigurationError, DataError, DegeneracyError
from ..utils.helpers import ReproHelpers
from .weights import SpatialWeights

logger = logging.getLogger(__name__)

REPLICATE_CHUNK = 100
ZONE_CHUNK = 32
TIE_RTOL = 1e-12
MIN_PERMUTATIONS = 99


@dataclass(frozen=True, eq=False)
class Deviations:
    """Mean deviations and their second moment."""

    z: np.ndarray
    m2: float


@dataclass(frozen=True, eq=False)
class MoranGlobalResult:
    """Global Moran's I with its permutation test."""

    I: float
    expected_I: float
    pseudo_p: float
    permutations: int
    seed: int
    replicates: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    def to_dict(self) -> Dict[str, float]:
        return {
            "I": self.I,
            "expected_I": self.expected_I,
            "pseudo_p": self.pseudo_p,
            "permutations": self.permutations,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class LisaResult:
    """Per-zone LISA statistics, quadrants and significance-gated labels."""

    values: np.ndarray
    z: np.ndarray
    lag: np.ndarray
    local_I: np.ndarray
    pseudo_p: np.ndarray
    quadrant: np.ndarray
    label: np.ndarray
    alpha: float
    threshold: float

    def counts(self) -> Dict[str, int]:
        """Zone count per label, in a fixed label order."""
        tally = Counter(self.label.tolist())
        return {member.value: int(tally.get(member.value, 0)) for member in Quadrant}

    def to_frame(self, zone_ids: Sequence[str]) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "zone_id": list(zone_ids),
                "value": self.values,
                "z": self.z,
                "lag": self.lag,
                "local_I": self.local_I,
                "pseudo_p": self.pseudo_p,
                "quadrant": self.quadrant,
                "label": self.label,
            }
        )


def standardize_values(x: Sequence[float]) -> Deviations:
    """
    Center values on their mean.

    Raises:
        DegeneracyError: fewer than 2 values or zero variance
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise DegeneracyError("At least two zone values are required")
    if not np.isfinite(x).all():
        raise DataError("Zone values must be finite")
    if np.ptp(x) == 0.0:
        raise DegeneracyError(ErrorMessages.ZERO_VARIANCE.value.format(n=len(x), value=x[0]))
    z = x - x.mean()
    m2 = float((z * z).sum() / len(z))
    if m2 == 0.0:
        raise DegeneracyError(ErrorMessages.ZERO_VARIANCE.value.format(n=len(x), value=x[0]))
    return Deviations(z=z, m2=m2)


def _check_dimensions(x: np.ndarray, w: SpatialWeights) -> None:
    if len(x) != w.n:
        raise DataError(ErrorMessages.DIMENSION_MISMATCH.value.format(values=len(x), zones=w.n))


def _check_permutations(permutations: int) -> None:
    if permutations < MIN_PERMUTATIONS:
        raise ConfigurationError(
            ErrorMessages.PARAMETER_RANGE.value.format(
                name="permutations", value=permutations, allowed=f"[{MIN_PERMUTATIONS}, inf)"
            )
        )


def _moran_rows(w: SpatialWeights, rows: np.ndarray, sum_sq: float) -> np.ndarray:
    """Moran's I for each row of a (replicates x n) deviation matrix."""
    lagged = (w.to_sparse() @ rows.T).T
    return (w.n / w.s0) * (rows * lagged).sum(axis=1) / sum_sq


def global_moran(x: Sequence[float], w: SpatialWeights) -> float:
    """Global Moran's I."""
    x = np.asarray(x, dtype=float)
    _check_dimensions(x, w)
    dev = standardize_values(x)
    return float(_moran_rows(w, dev.z[None, :], float((dev.z ** 2).sum()))[0])


def _tail_count(observed: np.ndarray, expected: np.ndarray, replicates: np.ndarray) -> np.ndarray:
    """Replicates at least as extreme as the observed value, per row."""
    tol = TIE_RTOL * np.maximum(1.0, np.abs(observed))
    upper = (replicates >= (observed - tol)[:, None]).sum(axis=1)
    lower = (replicates <= (observed + tol)[:, None]).sum(axis=1)
    return np.where(observed >= expected, upper, lower)


def permutation_test_global(
    x: Sequence[float],
    w: SpatialWeights,
    permutations: int = 999,
    seed: int = 0,
    workers: int = 1,
) -> MoranGlobalResult:
    """
    Global Moran's I with a random-permutation pseudo p-value.

    Args:
        x: Zone values
        w: Spatial weights
        permutations: Replicate count (>= 99)
        seed: Run seed; replicate r uses substream (seed, r)
        workers: Threads over fixed replicate chunks

    Returns:
        MoranGlobalResult
    """
    x = np.asarray(x, dtype=float)
    _check_dimensions(x, w)
    _check_permutations(permutations)
    dev = standardize_values(x)
    n = len(x)
    sum_sq = float((dev.z ** 2).sum())
    observed = float(_moran_rows(w, dev.z[None, :], sum_sq)[0])

    def run_chunk(replicates: range) -> np.ndarray:
        rows = np.empty((len(replicates), n))
        for offset, r in enumerate(replicates):
            rng = ReproHelpers.substream(seed, RandomStreams.GLOBAL_REPLICATE, r)
            rows[offset] = dev.z[rng.permutation(n)]
        return _moran_rows(w, rows, sum_sq)

    chunks = ReproHelpers.chunk_ranges(permutations, REPLICATE_CHUNK)
    replicates = np.concatenate(ReproHelpers.parallel_map(run_chunk, chunks, workers))
    expected = -1.0 / (n - 1)
    count = int(_tail_count(np.array([observed]), np.array([expected]), replicates[None, :])[0])
    result = MoranGlobalResult(
        I=observed,
        expected_I=expected,
        pseudo_p=(1 + count) / (1 + permutations),
        permutations=int(permutations),
        seed=int(seed),
        replicates=replicates,
    )
    logger.info(SuccessMessages.MORAN_DONE.value.format(value=result.I, expected=expected, p=result.pseudo_p))
    return result


def _row_lags(z: np.ndarray, w: SpatialWeights) -> np.ndarray:
    return np.array([z[nb] @ wt if len(nb) else 0.0 for nb, wt in zip(w.neighbors, w.weights)], dtype=float)


def local_moran(x: Sequence[float], w: SpatialWeights) -> np.ndarray:
    """Local Moran's I per zone."""
    x = np.asarray(x, dtype=float)
    _check_dimensions(x, w)
    dev = standardize_values(x)
    return dev.z * _row_lags(dev.z, w) / dev.m2


def conditional_permutation_local(
    x: Sequence[float],
    w: SpatialWeights,
    permutations: int = 999,
    seed: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """
    Conditional-permutation pseudo p-values for local Moran's I.

    For zone i the focal value stays fixed; each replicate fills i's
    neighbour slots with a random ordered sample (without replacement) of the
    other n-1 deviations. Zone i draws from substream (seed, i).

    Args:
        x: Zone values
        w: Spatial weights
        permutations: Replicate count (>= 99)
        seed: Run seed
        workers: Threads over fixed zone chunks

    Returns:
        Pseudo p-value per zone
    """
    x = np.asarray(x, dtype=float)
    _check_dimensions(x, w)
    _check_permutations(permutations)
    dev = standardize_values(x)
    z, m2, n = dev.z, dev.m2, len(x)
    observed = z * _row_lags(z, w) / m2
    expected = -(z ** 2) * w.row_sums / ((n - 1) * m2)

    def run_zone(i: int) -> float:
        neighbors, weights = w.neighbors[i], w.weights[i]
        k = len(neighbors)
        if k == 0:
            return 1.0
        others = np.delete(z, i)
        rng = ReproHelpers.substream(seed, RandomStreams.LOCAL_ZONE, i)
        keys = rng.random((permutations, n - 1))
        chosen = np.argpartition(keys, k - 1, axis=1)[:, :k]
        # Order the chosen slots by their keys: a uniformly random ordered sample
        chosen = np.take_along_axis(chosen, np.argsort(np.take_along_axis(keys, chosen, 1), axis=1), 1)
        replicates = z[i] * (others[chosen] @ weights) / m2
        count = _tail_count(observed[i:i + 1], expected[i:i + 1], replicates[None, :])[0]
        return (1 + int(count)) / (1 + permutations)

    def run_chunk(zones: range) -> List[float]:
        return [run_zone(i) for i in zones]

    chunks = ReproHelpers.chunk_ranges(n, ZONE_CHUNK)
    return np.array([p for chunk in ReproHelpers.parallel_map(run_chunk, chunks, workers) for p in chunk])


def fdr_threshold(pseudo_p: Sequence[float], alpha: float) -> float:
    """
    Benjamini-Hochberg cut-off: the largest p_(i) with p_(i) <= i * alpha / m,
    or 0 when no p-value qualifies.
    """
    p = np.sort(np.asarray(pseudo_p, dtype=float))
    m = len(p)
    if m == 0:
        return 0.0
    passing = np.flatnonzero(p <= alpha * np.arange(1, m + 1) / m)
    return float(p[passing[-1]]) if len(passing) else 0.0


def classify_lisa(
    x: Sequence[float],
    w: SpatialWeights,
    local_I: Sequence[float],
    pseudo_p: Sequence[float],
    alpha: float = 0.05,
    fdr: bool = False,
) -> LisaResult:
    """
    Quadrant per zone from the signs of (z_i, lag_i), gated by significance.

    Zero deviation or zero lag has no quadrant and is always NotSignificant.

    Args:
        x: Zone values
        w: Spatial weights
        local_I: Local Moran's I per zone
        pseudo_p: Pseudo p-value per zone
        alpha: Significance level in (0, 1]
        fdr: Gate by the Benjamini-Hochberg threshold instead of alpha

    Returns:
        LisaResult
    """
    if not (0.0 < alpha <= 1.0):
        raise ConfigurationError(ErrorMessages.PARAMETER_RANGE.value.format(name="alpha", value=alpha, allowed="(0, 1]"))
    x = np.asarray(x, dtype=float)
    _check_dimensions(x, w)
    dev = standardize_values(x)
    lag = _row_lags(dev.z, w)
    pseudo_p = np.asarray(pseudo_p, dtype=float)

    quadrant = np.full(len(x), Quadrant.NOT_SIGNIFICANT.value, dtype=object)
    high, low = dev.z > 0, dev.z < 0
    high_lag, low_lag = lag > 0, lag < 0
    quadrant[high & high_lag] = Quadrant.HH.value
    quadrant[high & low_lag] = Quadrant.HL.value
    quadrant[low & high_lag] = Quadrant.LH.value
    quadrant[low & low_lag] = Quadrant.LL.value

    threshold = fdr_threshold(pseudo_p, alpha) if fdr else alpha
    label = np.where(pseudo_p <= threshold, quadrant, Quadrant.NOT_SIGNIFICANT.value).astype(object)
    result = LisaResult(
        values=x,
        z=dev.z,
        lag=lag,
        local_I=np.asarray(local_I, dtype=float),
        pseudo_p=pseudo_p,
        quadrant=quadrant,
        label=label,
        alpha=float(alpha),
        threshold=float(threshold),
    )
    logger.info(SuccessMessages.LISA_DONE.value.format(counts=result.counts()))
    return result


def lisa(
    x: Sequence[float],
    w: SpatialWeights,
    permutations: int = 999,
    seed: int = 0,
    alpha: float = 0.05,
    fdr: bool = False,
    workers: int = 1,
) -> LisaResult:
    """Local Moran, conditional permutation and classification in one call."""
    local_I = local_moran(x, w)
    pseudo_p = conditional_permutation_local(x, w, permutations, seed, workers)
    return classify_lisa(x, w, local_I, pseudo_p, alpha, fdr)
