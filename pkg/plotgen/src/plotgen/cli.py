"""Command-line entry point: ``plotgen --csv 'out/agg__*.csv' --out fig``."""

from __future__ import annotations

import argparse
import glob
import sys

from .parse import parse_csv
from .render import render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotgen",
        description="Render convergence figures (mean +/- SE bands) from "
                    "aggregate CSVs",
    )
    parser.add_argument("--csv", required=True, action="append",
                        help="aggregate CSV path or glob; repeatable")
    parser.add_argument("--out", required=True,
                        help="output image path; PNG and SVG are both written")
    parser.add_argument("--layout", choices=("grid", "single"), default="grid",
                        help="grid: metric rows x label columns; single: one panel")
    logy = parser.add_mutually_exclusive_group()
    logy.add_argument("--logy", dest="logy", action="store_true", default=True,
                      help="log-scale y axis (default)")
    logy.add_argument("--no-logy", dest="logy", action="store_false")
    args = parser.parse_args(argv)

    paths = sorted({path for pattern in args.csv for path in glob.glob(pattern)})
    if not paths:
        print(f"no CSVs match {args.csv}", file=sys.stderr)
        return 1
    series = [parse_csv(path) for path in paths]
    written = render(series, args.out, layout=args.layout, logy=args.logy)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
