"""Figure rendering for l96enkf twin-experiment CSVs."""

from .render import PlotSpec, SchemaError, build_figure, read_bound, read_mse_csv, render

__all__ = ["PlotSpec", "SchemaError", "build_figure", "read_bound", "read_mse_csv", "render"]
