"""
Configuration module for analysis settings, column mappings and constants.
"""

from .settings import AnalysisConfig, RunConfig
from .constants import CrashFlags, Quadrant, ExitCodes, ErrorMessages, SuccessMessages
from .mapping import ColumnMapping

__all__ = [
    "AnalysisConfig",
    "RunConfig",
    "ColumnMapping",
    "CrashFlags",
    "Quadrant",
    "ExitCodes",
    "ErrorMessages",
    "SuccessMessages",
]
