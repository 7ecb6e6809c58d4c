"""
Utility modules for errors, validation, reproducibility helpers and crash ingest.

Only the exception types are imported eagerly; configuration imports them
while it is itself still loading.
"""

from .exceptions import (
    HotspotError,
    ConfigurationError,
    DataError,
    DegeneracyError,
    CoordinateError,
    StructuralError,
    DomainError,
    SizingError,
    OutputError,
)

__all__ = [
    "HotspotError",
    "ConfigurationError",
    "DataError",
    "DegeneracyError",
    "CoordinateError",
    "StructuralError",
    "DomainError",
    "SizingError",
    "OutputError",
]
