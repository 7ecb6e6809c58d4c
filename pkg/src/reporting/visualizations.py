"""
Temporal chart generator.
Renders monthly series and seasonality overlays as standalone Plotly HTML.
"""

from pathlib import Path
from typing import List, Optional, Sequence
import logging

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from ..config.constants import CrashFlags
from ..utils.helpers import ReproHelpers

logger = logging.getLogger(__name__)

MONTH_LABELS = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"]
TREND_WINDOW = 12
CHART_HEIGHT = 480
CHART_MARGIN = {"l": 60, "r": 30, "t": 70, "b": 50}
PRIMARY_COLOR = "#0078D4"
TREND_COLOR = "#D13438"
BORDER_COLOR = "#C8C6C4"


class ChartGenerator:
    """
    Chart generator for temporal collision views.
    Every figure gets the same layout and a fixed element id so HTML output is reproducible.
    """

    def __init__(self, height: int = CHART_HEIGHT):
        self.height = height

    def monthly_chart(self, series: pd.DataFrame, title: str = "Monthly collisions") -> go.Figure:
        """Line of monthly counts with a centred 12-month rolling mean as the trend."""
        dates = pd.to_datetime({"year": series["year"], "month": series["month"], "day": 1})
        trend = series["count"].rolling(TREND_WINDOW, center=True, min_periods=1).mean()

        fig = go.Figure()
        fig.add_trace(go.Scatter(x=dates, y=series["count"], mode="lines", name="Collisions",
                                 line={"color": PRIMARY_COLOR}))
        fig.add_trace(go.Scatter(x=dates, y=trend, mode="lines", name=f"{TREND_WINDOW}-month mean",
                                 line={"color": TREND_COLOR, "dash": "dash"}))
        fig.update_xaxes(title_text="Month")
        fig.update_yaxes(title_text="Collisions")
        self._apply_styling(fig, title)
        return fig

    def seasonality_chart(self, matrix: pd.DataFrame, title: str = "Seasonality of collisions") -> go.Figure:
        """One line per year over the twelve calendar months."""
        colors = px.colors.sequential.Blues[2:] or [PRIMARY_COLOR]
        fig = go.Figure()
        for position, (year, row) in enumerate(matrix.iterrows()):
            fig.add_trace(go.Scatter(x=MONTH_LABELS, y=[int(row[m]) for m in range(1, 13)], mode="lines+markers",
                                     name=str(year), line={"color": colors[position % len(colors)]}))
        fig.update_xaxes(title_text="Month")
        fig.update_yaxes(title_text="Collisions")
        self._apply_styling(fig, title)
        return fig

    def flag_chart(self, flag_series: pd.DataFrame, flags: Optional[Sequence[str]] = None,
                   title: str = "Monthly collisions by circumstance") -> go.Figure:
        """Monthly counts per circumstance flag."""
        names = CrashFlags.get_display_names()
        flags = list(flags) if flags else CrashFlags.get_all_types()
        dates = pd.to_datetime({"year": flag_series["year"], "month": flag_series["month"], "day": 1})
        fig = go.Figure()
        for position, flag in enumerate(flags):
            fig.add_trace(go.Scatter(x=dates, y=flag_series[flag], mode="lines", name=names.get(flag, flag),
                                     line={"color": px.colors.qualitative.Set2[position % 8]}))
        fig.update_xaxes(title_text="Month")
        fig.update_yaxes(title_text="Collisions")
        self._apply_styling(fig, title)
        return fig

    def _apply_styling(self, fig: go.Figure, title: str) -> None:
        fig.update_layout(
            title={"text": title, "font": {"size": 18}, "x": 0.5, "xanchor": "center"},
            height=self.height,
            margin=CHART_MARGIN,
            plot_bgcolor="rgba(0,0,0,0)",
            paper_bgcolor="rgba(0,0,0,0)",
            legend={"bgcolor": "rgba(255,255,255,0.8)", "bordercolor": BORDER_COLOR, "borderwidth": 1},
        )
        fig.update_xaxes(gridcolor="#E1DFDD", showline=True, linewidth=1, linecolor=BORDER_COLOR)
        fig.update_yaxes(gridcolor="#E1DFDD", showline=True, linewidth=1, linecolor=BORDER_COLOR)

    @staticmethod
    def write_html(fig: go.Figure, path: Path, div_id: str) -> Path:
        """Standalone HTML with the Plotly bundle loaded from CDN and a fixed div id."""
        html = fig.to_html(full_html=True, include_plotlyjs="cdn", div_id=div_id)
        return ReproHelpers.write_text(Path(path), html)

    def write_temporal_charts(self, series: pd.DataFrame, matrix: pd.DataFrame,
                              flag_series: Optional[pd.DataFrame], output_dir: Path) -> List[Path]:
        """Write the monthly, seasonality and (optionally) circumstance charts."""
        output_dir = Path(output_dir)
        written = [
            self.write_html(self.monthly_chart(series), output_dir / "monthly.html", "monthly-chart"),
            self.write_html(self.seasonality_chart(matrix), output_dir / "seasonality.html", "seasonality-chart"),
        ]
        if flag_series is not None:
            written.append(self.write_html(self.flag_chart(flag_series), output_dir / "flags.html", "flags-chart"))
        logger.info(f"Wrote {len(written)} temporal charts to {output_dir}")
        return written
