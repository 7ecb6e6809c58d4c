"""
Reporting module: raster, GeoJSON/CSV/JSON writers and temporal charts.
"""

from .raster import export_raster, read_ascii_grid
from .exporters import write_lisa_csv, write_lisa_geojson, write_report
from .visualizations import ChartGenerator

__all__ = ["export_raster", "read_ascii_grid", "write_lisa_csv", "write_lisa_geojson", "write_report", "ChartGenerator"]
