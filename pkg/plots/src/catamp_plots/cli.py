"""Console entry points: render-wigner and render-trajectory."""

from __future__ import annotations

import argparse
import sys

from .csv_io import MalformedCsvError
from .render import render_trajectory, render_wigner


def _parse_inset(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "inset must be q0,q1,p0,p1 (four comma-separated numbers)"
        )
    try:
        return tuple(float(v) for v in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"non-numeric inset bound: {exc}")


def main_wigner(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-wigner",
        description="Render a Wigner-grid CSV as a phase-space heatmap")
    parser.add_argument("csv")
    parser.add_argument("image")
    parser.add_argument("--inset", type=_parse_inset, default=None,
                        metavar="Q0,Q1,P0,P1",
                        help="zoom window drawn as a corner inset")
    args = parser.parse_args(argv)
    try:
        out = render_wigner(args.csv, args.image, args.inset)
    except (MalformedCsvError, OSError) as exc:
        print(f"render-wigner: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


def main_trajectory(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-trajectory",
        description="Render a frame-trajectory CSV as coupling/orbit panels")
    parser.add_argument("csv")
    parser.add_argument("image")
    args = parser.parse_args(argv)
    try:
        out = render_trajectory(args.csv, args.image)
    except (MalformedCsvError, OSError) as exc:
        print(f"render-trajectory: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main_wigner())
