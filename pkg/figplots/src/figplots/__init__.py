"""Figure rendering for the enantiomer-selective transfer simulator's CSV outputs."""

__version__ = "0.1.0"

from .figures import build_figure
from .render import render
from .schema import PlotJob, SchemaError
