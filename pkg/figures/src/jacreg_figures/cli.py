"""Command-line entry point: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def build_parser():
    p = argparse.ArgumentParser(
        prog="jacreg-figures",
        description="Render figures from experiment run directories")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--run", action="append", required=True, dest="runs",
                   help="run directory (repeat for multi-run figures)")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--array",
                   help="array name under arrays/ (heatmap and spectrum)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.kind, runs=args.runs, out_path=args.out,
                      array=args.array)
    try:
        out = render(spec)
    except SchemaError as ex:
        print(f"schema error: {ex}", file=sys.stderr)
        sys.exit(2)
    print(out)


if __name__ == "__main__":
    main()
