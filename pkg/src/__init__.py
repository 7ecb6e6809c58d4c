"""
Crash Hotspots
Spatial statistics engine for collision hotspots over census tracts: KNN
weights, Moran's I and LISA with permutation inference, Empirical Bayes
severity rates, kernel density rasters and calendar aggregation.

Version: 1.0.0
"""

__version__ = "1.0.0"

from .config.settings import AnalysisConfig, RunConfig
from .pipeline import HotspotPipeline

__all__ = [
    "AnalysisConfig",
    "RunConfig",
    "HotspotPipeline",
]
