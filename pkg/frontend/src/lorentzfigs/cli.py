"""Command line: render figure presets from run directories."""

import argparse
import sys

from .figures import PRESETS, FigureSpec, render
from .io import SchemaError


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="lorentzfigs",
        description="Render softlorentz figure presets from CSV/JSON output")
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render")
    rend.add_argument("--figure", required=True, choices=PRESETS)
    rend.add_argument("--run-dir", action="append", default=[],
                      help="run directory (repeat for multi-speed figures)")
    rend.add_argument("--events", default=None, help="events.csv path")
    rend.add_argument("--fits", default=None,
                      help="top-level fits.json (cross-speed slopes)")
    rend.add_argument("--output", default="figure.pdf")
    args = parser.parse_args(argv)
    spec = FigureSpec(figure=args.figure, run_dirs=tuple(args.run_dir),
                      events=args.events, fits=args.fits,
                      output=args.output)
    try:
        path = render(spec)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
