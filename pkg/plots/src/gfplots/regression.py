"""Reference figures rendered from the bundled sample CSV.

Used by regression tests: the returned structures are pure functions of the
bundled data, so any change to selection, grouping or the k-adjustment
transform shows up as a diff against frozen values.
"""

from __future__ import annotations

import os
import tempfile
from typing import Dict, List

from importlib import resources

from .core import PlotSpec, data_series, render


def reference_csv_path() -> str:
    return str(resources.files("gfplots").joinpath("data/reference.csv"))


def reference_specs(outdir: str) -> Dict[str, PlotSpec]:
    csv_path = reference_csv_path()

    def out(name: str) -> str:
        return os.path.join(outdir, name + ".png")

    return {
        "threshold": PlotSpec(
            inputs=(csv_path,), kind="threshold",
            filters={"schedule": "ZX", "noise": "depolarising"},
            title="threshold crossing", output=out("threshold")),
        "bias": PlotSpec(
            inputs=(csv_path,), kind="bias", group_by=("schedule",),
            y_key="p", filters={"noise": "independent"},
            title="threshold vs bias", output=out("bias")),
        "comparison": PlotSpec(
            inputs=(csv_path,), kind="comparison",
            group_by=("family", "L_or_code"),
            filters={"schedule": "ZZXX"},
            k_adjust={"hyperbolic/hyperbolic_8_4_512": 1, "toric/6": 33},
            title="families at matched logical content", output=out("comparison")),
        "decay": PlotSpec(
            inputs=(csv_path,), kind="decay", x_key="rounds",
            filters={"schedule": "ZZZXXX"},
            title="failure decay", output=out("decay")),
    }


def render_reference_series(outdir: str = None) -> Dict[str, Dict[str, Dict[str, List[float]]]]:
    """Render every reference figure; return the plotted series per figure."""
    tmp = None
    if outdir is None:
        tmp = tempfile.TemporaryDirectory()
        outdir = tmp.name
    try:
        out = {}
        for name, spec in reference_specs(outdir).items():
            path = render(spec)
            assert os.path.getsize(path) > 0
            out[name] = data_series(spec)
        return out
    finally:
        if tmp is not None:
            tmp.cleanup()
