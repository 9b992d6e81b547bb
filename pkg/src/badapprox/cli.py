"""Command-line front end.

Exit codes: 0 success, 2 config error, 3 budget exceeded, 4 verification
below threshold, 5 decay hypothesis violated.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import config_from_mapping, parse_kv_text
from .errors import BudgetExceeded, ConfigError, BadApproxError, PsiNotValid
from .harness import run_exponent, run_lemma2, run_records, run_series, run_verify_theorem

_RUNNERS = {
    "records": run_records,
    "exponent": run_exponent,
    "verify-theorem": run_verify_theorem,
    "series": run_series,
    "lemma2": run_lemma2,
}


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", help="override rng seed")
    parser.add_argument("--t-max", dest="t_max", help="override enumeration horizon")
    parser.add_argument("--samples", help="override sample count")
    parser.add_argument("--out-dir", dest="out_dir", help="override output directory")
    parser.add_argument("--parallelism", help="worker count or 'auto'")
    parser.add_argument("--convention", choices=("strict", "inclusive"), help="norm range convention")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="badapprox",
        description="Irrationality measures, exponents and covering series for linear subspaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("records", "record table of one subject -> records.csv"),
        ("exponent", "exponent estimate of one subject"),
        ("verify-theorem", "Monte Carlo exponent-bound verification -> samples.csv"),
        ("series", "covering series profile -> profile.csv"),
        ("lemma2", "shifted half-neighborhood lattice count property"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    return parser


def _merged_config(ns: argparse.Namespace):
    raw = {}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                raw = parse_kv_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {ns.config}: {exc}") from exc
    for key in ("seed", "t_max", "samples", "out_dir", "parallelism", "convention"):
        value = getattr(ns, key)
        if value is not None:
            raw[key] = value
    return config_from_mapping(raw)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = _merged_config(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        summary = _RUNNERS[ns.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PsiNotValid as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return 5
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except BadApproxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return int(summary.get("exit_code", 0))


if __name__ == "__main__":
    sys.exit(main())
