"""Command line: render a figure from a JSON panel specification."""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .panels import PanelSpec, render_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsmooth-plot",
        description="Render multi-panel convergence plots from benchmark CSVs.",
    )
    parser.add_argument(
        "--version", action="version", version=f"gsmooth-plot {__version__}"
    )
    parser.add_argument(
        "--panels",
        required=True,
        help="JSON file: a list of panel objects "
        '({"csv": ..., "x": ..., "y": ..., "log_y": ..., "title": ..., "styles": ...})',
    )
    parser.add_argument("--out", required=True, help="output image path (e.g. fig.png)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with open(args.panels, encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, list):
        raise ValueError(f"{args.panels}: expected a JSON list of panels")
    panels = [PanelSpec.from_dict(p) for p in payload]
    out = render_figure(panels, args.out)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
