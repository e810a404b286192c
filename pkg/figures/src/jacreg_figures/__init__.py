"""Figure rendering for jacreg run directories.

Everything here is a pure function of the CSV/JSON files a run writes;
no science is recomputed. Four figure kinds are supported:

  heatmap         -- one pixel per grid cell of a labeled array CSV
  mae_curve       -- reference-error curves from metrics.csv
  objective_pair  -- log-objective traces of paired runs on one axis
  spectrum        -- normalized singular-value profiles
"""

from .render import FigureSpec, SchemaError, heatmap_rgba, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SchemaError", "render", "heatmap_rgba",
           "__version__"]
