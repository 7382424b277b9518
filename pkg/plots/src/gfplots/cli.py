"""``gfplots``: render one figure from result CSV files."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .core import KINDS, EmptySelection, PlotSpec, SchemaMismatch, render


def _parse_filters(pairs: List[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise SchemaMismatch("filter %r is not column=value" % pair)
        key, value = pair.split("=", 1)
        out[key] = value
    return out


def _parse_k_adjust(pairs: List[str]):
    if not pairs:
        return None
    if len(pairs) == 1 and "=" not in pairs[0]:
        return int(pairs[0])
    return {k: int(v) for k, v in (p.split("=", 1) for p in pairs)}


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gfplots", description="render a figure from result CSV files")
    parser.add_argument("inputs", nargs="+", help="result CSV files")
    parser.add_argument("--kind", choices=KINDS, default="threshold")
    parser.add_argument("--group-by", nargs="+", default=["L_or_code"])
    parser.add_argument("--x-key", default=None)
    parser.add_argument("--y-key", default="rate_z")
    parser.add_argument("--x-scale", choices=("linear", "log"), default="linear")
    parser.add_argument("--y-scale", choices=("linear", "log"), default="linear")
    parser.add_argument("--filter", nargs="*", default=[],
                        metavar="COL=VALUE", dest="filters")
    parser.add_argument("--k-adjust", nargs="*", default=[],
                        metavar="[LABEL=]COPIES")
    parser.add_argument("--title", default="")
    parser.add_argument("--output", "-o", default="figure.png")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(
            inputs=tuple(args.inputs), kind=args.kind,
            group_by=tuple(args.group_by), x_key=args.x_key,
            y_key=args.y_key, x_scale=args.x_scale, y_scale=args.y_scale,
            filters=_parse_filters(args.filters),
            k_adjust=_parse_k_adjust(args.k_adjust),
            title=args.title, output=args.output)
        path = render(spec)
    except (SchemaMismatch, EmptySelection, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    print(path)
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
