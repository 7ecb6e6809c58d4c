"""
Analysis module: spatial weights, Moran's I and LISA, EBI rates, kernel density and calendar aggregation.
"""

from .weights import SpatialWeights, knn_weights, row_standardize, symmetrize, write_weights_csv, read_weights_csv
from .autocorr import (
    LisaResult,
    MoranGlobalResult,
    classify_lisa,
    conditional_permutation_local,
    fdr_threshold,
    global_moran,
    lisa,
    local_moran,
    permutation_test_global,
    standardize_values,
)
from .ebi import EbiVector, SeverityInput, ebi_transform, global_rate, rate_std, smoothed_rate
from .kde import GridSpec, KdeGrid, auto_grid, kde_grid, silverman_bandwidth
from .temporal import flag_monthly_series, monthly_series, seasonal_matrix

__all__ = [
    "SpatialWeights",
    "knn_weights",
    "row_standardize",
    "symmetrize",
    "write_weights_csv",
    "read_weights_csv",
    "LisaResult",
    "MoranGlobalResult",
    "classify_lisa",
    "conditional_permutation_local",
    "fdr_threshold",
    "global_moran",
    "lisa",
    "local_moran",
    "permutation_test_global",
    "standardize_values",
    "EbiVector",
    "SeverityInput",
    "ebi_transform",
    "global_rate",
    "rate_std",
    "smoothed_rate",
    "GridSpec",
    "KdeGrid",
    "auto_grid",
    "kde_grid",
    "silverman_bandwidth",
    "flag_monthly_series",
    "monthly_series",
    "seasonal_matrix",
]
