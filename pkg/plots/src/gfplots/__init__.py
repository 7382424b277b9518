"""Render figures from benchmark result CSV files.

This package is strictly read-only over the simulation harness output: it
parses the versioned CSV schema, selects and groups rows, and draws the
standard figures (threshold crossings, bias curves, code-family comparisons
with k-adjusted failure rates, and approximation-error decay).  It contains
no simulation logic and never imports the simulator.
"""

from .core import (
    CSV_COLUMNS,
    EmptySelection,
    PlotSpec,
    SchemaMismatch,
    data_series,
    k_adjusted,
    load_rows,
    render,
)

__all__ = [
    "CSV_COLUMNS",
    "EmptySelection",
    "PlotSpec",
    "SchemaMismatch",
    "data_series",
    "k_adjusted",
    "load_rows",
    "render",
]
