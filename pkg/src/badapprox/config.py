"""Flat key = value run configuration.

One dataclass carries the union of all subcommand settings; each runner reads
the subset it needs.  The file format is UTF-8 text, one `key = value` per
line, `#` starts a comment, blank lines ignored.  Unknown keys are rejected
so typos fail loudly instead of silently running defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .errors import ConfigError

_CONVENTIONS = ("inclusive", "strict")
_METHODS = ("tail_slope", "max_ratio")
_B_KINDS = ("algebraic", "golden_embedded", "rational")
_SUBJECTS = ("golden", "algebraic", "rational", "theta")


def parse_kv_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines into a string mapping."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass
class ExperimentConfig:
    # subject selection for records / exponent / lemma2
    subject: str = "golden"
    degree: int = 4
    rational_basis: str = "1 1"  # rows of integers separated by ';'
    theta_rows: int = 1
    theta_cols: int = 1
    # scenario dimensions for verify-theorem and series
    d: int = 4
    a: int = 3
    b: int = 1
    c: int = 2
    b_kind: str = "algebraic"
    theta_bound: float = 2.0
    # run controls
    seed: int = 1
    t_max: int = 10_000
    sample_count: int = 50
    method: str = "tail_slope"
    window: int | None = None
    slack: float = 0.25
    threshold: float = 0.9
    out_dir: str = "out"
    parallelism: int | None = None  # None = auto
    convention: str = "inclusive"
    node_budget: int = 10**8
    # decay functions for series / lemma2
    psi_rho: float = 0.2
    psi_gamma: float = 1.0
    psi_logpow: float = 0.0
    phi_rho: float = 1.0
    phi_gamma: float = 1.8
    phi_logpow: float = 0.0
    series_t_max: int = 100_000
    # lemma2 controls
    t_list: str = "10 100 1000"
    shift_count: int = 1000

    def __post_init__(self):
        if self.sample_count < 1:
            raise ConfigError(f"samples must be >= 1, got {self.sample_count}")
        if self.t_max < 10:
            raise ConfigError(f"t_max must be >= 10, got {self.t_max}")
        if self.slack < 0:
            raise ConfigError(f"slack must be >= 0, got {self.slack}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.convention not in _CONVENTIONS:
            raise ConfigError(f"convention must be one of {_CONVENTIONS}, got {self.convention!r}")
        if self.method not in _METHODS:
            raise ConfigError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.b_kind not in _B_KINDS:
            raise ConfigError(f"b_kind must be one of {_B_KINDS}, got {self.b_kind!r}")
        if self.subject not in _SUBJECTS:
            raise ConfigError(f"subject must be one of {_SUBJECTS}, got {self.subject!r}")
        if self.parallelism is not None and self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1 or auto, got {self.parallelism}")
        if self.window is not None and self.window < 2:
            raise ConfigError(f"window must be >= 2 or auto, got {self.window}")
        if self.node_budget < 1:
            raise ConfigError("node_budget must be positive")
        if self.shift_count < 1:
            raise ConfigError("shift_count must be >= 1")

    @property
    def effective_parallelism(self) -> int:
        if self.parallelism is not None:
            return self.parallelism
        return max(1, os.cpu_count() or 1)

    def t_values(self) -> list[int]:
        try:
            vals = [int(tok) for tok in self.t_list.replace(",", " ").split()]
        except ValueError as exc:
            raise ConfigError(f"t_list must be integers, got {self.t_list!r}") from exc
        if not vals or any(v < 1 for v in vals):
            raise ConfigError(f"t_list entries must be >= 1, got {self.t_list!r}")
        return vals


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_AUTO_KEYS = {"window", "parallelism"}
# CLI replaces dashes; "samples" is friendlier than sample_count in files too.
_ALIASES = {"samples": "sample_count"}


def _convert(key: str, value: str):
    kind = _FIELD_TYPES[key]
    if key in _AUTO_KEYS:
        if value.lower() == "auto":
            return None
        kind = "int"
    if kind == "int":
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected integer, got {value!r}") from exc
    if kind == "float":
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected number, got {value!r}") from exc
    return value


def config_from_mapping(raw: dict[str, str]) -> ExperimentConfig:
    kwargs = {}
    for key, value in raw.items():
        name = _ALIASES.get(key, key)
        if name not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[name] = _convert(name, str(value))
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return config_from_mapping(parse_kv_text(text))
