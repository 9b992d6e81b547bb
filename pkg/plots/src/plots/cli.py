"""Command-line front end: `plots <kind> <in.csv> <out.png>`.

Exit codes: 0 success, 2 for anything wrong with the input (missing file,
schema mismatch, empty payload) or the output path.
"""

from __future__ import annotations

import argparse
import json
import sys

from .figures import PlotJob, PlotKind
from .io import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render badapprox CSV outputs as PNG figures.",
    )
    parser.add_argument("kind", choices=[k.value for k in PlotKind],
                        help="which schema the input follows")
    parser.add_argument("input_csv", help="CSV produced by the badapprox CLI")
    parser.add_argument("output_png", help="where to write the figure")
    parser.add_argument("--bound", type=float, default=None,
                        help="override the bound column (samples only)")
    parser.add_argument("--slack", type=float, default=None,
                        help="override the slack column (samples only)")
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        job = PlotJob(input_csv=ns.input_csv, kind=PlotKind(ns.kind),
                      output_path=ns.output_png, bound=ns.bound, slack=ns.slack)
        annotations = job.run()
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(annotations, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
