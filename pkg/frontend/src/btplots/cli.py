"""Command-line entry point: ``plots --kind K --in CSV... --out PNG``."""
from __future__ import annotations

import argparse
import sys

from .figures import CLOCKS, KINDS, PlotError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render a figure from bitemper harness CSV files.")
    parser.add_argument("--kind", required=True, choices=KINDS,
                        help="figure kind")
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV", help="input CSV file(s)")
    parser.add_argument("--out", required=True, metavar="PNG",
                        help="output image path")
    parser.add_argument("--clock", choices=CLOCKS, default="evaluations",
                        help="x-axis clock for ladder / iter_compare "
                             "(default: evaluations)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.kind, args.inputs, args.out, args.clock)
    except (PlotError, OSError) as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
