"""Readers for the three badapprox CSV schemas.

The CSV files are the whole contract between the measurement package and
this one: lines starting with `#` are comments (the first is always a
timestamp), the next line is the exact header, all floats round-trip through
repr.  Readers validate the header verbatim and fail loudly on anything
else, so a mismatched or truncated file never renders a misleading figure.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

RECORDS_HEADER = "t,value,witness,log10_t,log10_value"
SAMPLES_HEADER = (
    "sample_id,theta_rowmajor,omega_hat,bound,slack,within_bound,"
    "records_count,t_max_scanned,flags"
)
PROFILE_HEADER = "T,mu,M,lambda,term,partial_sum"


class SchemaError(Exception):
    """The input file does not match the documented CSV schema."""


@dataclass(frozen=True)
class Table:
    """Parsed CSV payload: column arrays plus the `key=value` comments."""

    columns: dict
    comments: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.columns[name]

    @property
    def row_count(self) -> int:
        first = next(iter(self.columns.values()))
        return len(first)


def _read_raw(path: str, expected_header: str):
    if not os.path.exists(path):
        raise SchemaError(f"input file does not exist: {path}")
    comments = {}
    header = None
    body = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                text = line.lstrip("#").strip()
                if "=" in text:
                    key, value = text.split("=", 1)
                    comments[key.strip()] = value.strip()
                continue
            if header is None:
                header = line
                continue
            if line.strip():
                body.append(line)
    if header is None:
        raise SchemaError(f"{path}: no header line found")
    if header.strip() != expected_header:
        raise SchemaError(
            f"{path}: header {header.strip()!r} does not match {expected_header!r}"
        )
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    width = len(expected_header.split(","))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise SchemaError(f"{path}: row {i + 1} has {len(row)} fields, expected {width}")
    return rows, comments


def read_records(path: str) -> Table:
    """records.csv: one row per strict drop of the measure function."""
    rows, comments = _read_raw(path, RECORDS_HEADER)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        columns = {
            "t": np.array([int(r[0]) for r in rows], dtype=np.int64),
            "value": np.array([float(r[1]) for r in rows]),
            "witness": [r[2] for r in rows],
            "log10_t": np.array([float(r[3]) for r in rows]),
            "log10_value": np.array([float(r[4]) for r in rows]),
        }
    except ValueError as exc:
        raise SchemaError(f"{path}: unparsable field ({exc})") from exc
    return Table(columns=columns, comments=comments)


def read_samples(path: str) -> Table:
    """samples.csv: one row per sampled candidate subspace."""
    rows, comments = _read_raw(path, SAMPLES_HEADER)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        columns = {
            "sample_id": np.array([int(r[0]) for r in rows], dtype=np.int64),
            "theta_rowmajor": [r[1] for r in rows],
            "omega_hat": np.array([float(r[2]) for r in rows]),
            "bound": np.array([float(r[3]) for r in rows]),
            "slack": np.array([float(r[4]) for r in rows]),
            "within_bound": np.array([r[5] == "true" for r in rows]),
            "records_count": np.array([int(r[6]) for r in rows], dtype=np.int64),
            "t_max_scanned": np.array([int(r[7]) for r in rows], dtype=np.int64),
            "flags": [r[8] for r in rows],
        }
    except ValueError as exc:
        raise SchemaError(f"{path}: unparsable field ({exc})") from exc
    return Table(columns=columns, comments=comments)


def read_profile(path: str) -> Table:
    """profile.csv: covering series terms; carries `# classification=...`."""
    rows, comments = _read_raw(path, PROFILE_HEADER)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        columns = {
            "T": np.array([int(r[0]) for r in rows], dtype=np.int64),
            "mu": np.array([float(r[1]) for r in rows]),
            "M": np.array([float(r[2]) for r in rows]),
            "lambda": np.array([float(r[3]) for r in rows]),
            "term": np.array([float(r[4]) for r in rows]),
            "partial_sum": np.array([float(r[5]) for r in rows]),
        }
    except ValueError as exc:
        raise SchemaError(f"{path}: unparsable field ({exc})") from exc
    return Table(columns=columns, comments=comments)
