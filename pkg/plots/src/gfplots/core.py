"""CSV parsing, series selection and figure rendering."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# The versioned result schema written by the simulation harness.
CSV_COLUMNS = [
    "family", "L_or_code", "l", "schedule", "parallelised", "noise", "p",
    "eta", "rounds", "trials", "fail_z", "fail_x", "rate_z", "rate_x",
    "ci_low", "ci_high", "seed", "wall_ms",
]

_FLOAT_COLUMNS = frozenset(
    ["p", "eta", "rate_z", "rate_x", "ci_low", "ci_high", "wall_ms"])
_INT_COLUMNS = frozenset(
    ["l", "parallelised", "rounds", "trials", "fail_z", "fail_x", "seed"])

KINDS = ("threshold", "bias", "comparison", "decay")


class SchemaMismatch(Exception):
    """The CSV header does not match the versioned result schema."""


class EmptySelection(Exception):
    """No rows survive the spec's filters."""


@dataclass(frozen=True)
class PlotSpec:
    """One figure: which rows to read, how to group them, where to draw.

    ``k_adjust`` maps a series label to the number of independent code
    copies it stands in for; each affected rate r becomes 1 - (1-r)^m so
    codes with different logical-qubit counts compare per logical content.
    An int applies the same exponent to every series.
    """

    inputs: Tuple[str, ...]
    kind: str = "threshold"
    group_by: Tuple[str, ...] = ("L_or_code",)
    x_key: Optional[str] = None  # kind default when None
    y_key: str = "rate_z"
    x_scale: str = "linear"
    y_scale: str = "linear"
    filters: Mapping[str, str] = field(default_factory=dict)
    k_adjust: object = None  # None | int | Mapping[label, int]
    title: str = ""
    output: str = "figure.png"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaMismatch("unknown plot kind %r" % self.kind)
        for col in tuple(self.group_by) + tuple(self.filters):
            if col not in CSV_COLUMNS:
                raise SchemaMismatch("unknown column %r" % col)

    @property
    def x_column(self) -> str:
        if self.x_key is not None:
            return self.x_key
        return {"threshold": "p", "bias": "eta",
                "comparison": "p", "decay": "p"}[self.kind]


def load_rows(paths: Sequence[str]) -> List[Dict[str, object]]:
    """Parse result CSV files, enforcing the schema on each header."""
    rows: List[Dict[str, object]] = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_COLUMNS:
                raise SchemaMismatch(
                    "%s: header %r does not match the result schema"
                    % (path, reader.fieldnames))
            for raw in reader:
                row: Dict[str, object] = dict(raw)
                for key in _FLOAT_COLUMNS:
                    row[key] = float(raw[key]) if raw[key] else None
                for key in _INT_COLUMNS:
                    row[key] = int(raw[key])
                rows.append(row)
    return rows


def k_adjusted(rate: float, copies: int) -> float:
    """Failure rate of `copies` independent blocks with per-block rate."""
    return 1.0 - (1.0 - rate) ** copies


def _copies(spec: PlotSpec, label: str) -> int:
    if spec.k_adjust is None:
        return 1
    if isinstance(spec.k_adjust, int):
        return spec.k_adjust
    return int(spec.k_adjust.get(label, 1))


def data_series(spec: PlotSpec) -> Dict[str, Dict[str, List[float]]]:
    """The exact numbers a render would draw, keyed by series label.

    Each series holds sorted x values plus y/err_low/err_high after any
    k-adjustment; renders are pure functions of this structure.
    """
    rows = load_rows(spec.inputs)
    selected = [r for r in rows
                if all(str(r[k]) == str(v) for k, v in spec.filters.items())]
    if not selected:
        raise EmptySelection("filters %r match no rows" % (spec.filters,))
    series: Dict[str, Dict[str, List[float]]] = {}
    xcol = spec.x_column
    for row in sorted(selected, key=lambda r: (tuple(str(r[g]) for g in spec.group_by),
                                               row_x(r, xcol))):
        label = "/".join(str(row[g]) for g in spec.group_by)
        m = _copies(spec, label)
        y = k_adjusted(float(row[spec.y_key]), m)
        lo = k_adjusted(float(row["ci_low"]), m) if row["ci_low"] is not None else y
        hi = k_adjusted(float(row["ci_high"]), m) if row["ci_high"] is not None else y
        s = series.setdefault(label, {"x": [], "y": [], "err_low": [], "err_high": []})
        s["x"].append(float(row_x(row, xcol)))
        s["y"].append(y)
        s["err_low"].append(max(0.0, y - lo))
        s["err_high"].append(max(0.0, hi - y))
    return series


def row_x(row: Dict[str, object], column: str) -> float:
    value = row.get(column)
    if value is None or value == "":
        raise SchemaMismatch("row has no value in x column %r" % column)
    return float(value)


_KIND_SCALES = {
    "threshold": ("linear", "linear"),
    "bias": ("log", "log"),
    "comparison": ("linear", "log"),
    "decay": ("linear", "log"),
}


def render(spec: PlotSpec) -> str:
    """Draw the figure described by ``spec`` and return the output path."""
    series = data_series(spec)
    default_x, default_y = _KIND_SCALES[spec.kind]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    try:
        for label, s in series.items():
            ax.errorbar(s["x"], s["y"], yerr=[s["err_low"], s["err_high"]],
                        marker="o", markersize=3.5, capsize=2.0,
                        linewidth=1.0, label=label)
        ax.set_xscale(spec.x_scale if spec.x_scale != "linear" else default_x)
        ax.set_yscale(spec.y_scale if spec.y_scale != "linear" else default_y)
        ax.set_xlabel(spec.x_column)
        ax.set_ylabel(spec.y_key + (" (k-adjusted)" if spec.k_adjust else ""))
        if spec.title:
            ax.set_title(spec.title)
        ax.legend(title="/".join(spec.group_by), fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(spec.output)
    finally:
        plt.close(fig)
    return spec.output
