"""memplots: report figures from qmemsim results CSV files."""

__version__ = "0.1.0"

from .render import KINDS, PlotSpec, RenderSummary, render
from .schema import Row, SchemaError, read_results

__all__ = ["KINDS", "PlotSpec", "RenderSummary", "render", "Row", "SchemaError",
           "read_results"]
