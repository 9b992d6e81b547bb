"""Figure builders for the three badapprox CSV kinds.

Each builder reads one CSV, writes one PNG via the Agg backend, and returns
an annotation dict describing what was drawn (fitted slope, bound line
position, classification).  The CLI prints that dict as JSON; tests assert
against it instead of inspecting pixels.

Output is deterministic for fixed inputs: fixed dpi, fixed style, and the
PNG metadata pinned so no timestamp or library version leaks into the bytes.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_profile, read_records, read_samples

_SAVE_OPTS = dict(dpi=120, metadata={"Software": "badapprox-plots"})
_FIT_WINDOW_CAP = 10


def _save(fig, out_path: str):
    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(out_path, **_SAVE_OPTS)
    plt.close(fig)


def plot_records(in_csv: str, out_png: str) -> dict:
    """Log-log staircase of the record table with a fitted tail slope.

    The slope is fit by least squares on the trailing half of the positive
    records (at most 10); with fewer than 3 positive rows no fit is drawn.
    A closing zero record cannot sit on a log axis and is marked with a
    vertical line instead.
    """
    table = read_records(in_csv)
    if table.row_count < 2:
        raise SchemaError(f"{in_csv}: need at least 2 record rows, have {table.row_count}")
    t = table["t"].astype(np.float64)
    value = table["value"]
    pos = value > 0.0

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.step(t[pos], value[pos], where="post", color="tab:blue", lw=1.5)
    ax.plot(t[pos], value[pos], "o", color="tab:blue", ms=3)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("record value")
    ax.grid(True, which="both", alpha=0.3)

    fitted = None
    n_pos = int(np.count_nonzero(pos))
    if n_pos >= 3:
        window = min(_FIT_WINDOW_CAP, max(2, n_pos // 2))
        xs = table["log10_t"][pos][-window:]
        ys = table["log10_value"][pos][-window:]
        slope, intercept = np.polyfit(xs, ys, 1)
        fitted = float(slope)
        line_x = np.array([xs[0], xs[-1]])
        ax.plot(10**line_x, 10 ** (slope * line_x + intercept),
                "--", color="tab:red", lw=1.2)
        ax.text(0.03, 0.06, f"tail slope {fitted:.3f}", transform=ax.transAxes,
                color="tab:red")

    closes_at = None
    if np.any(~pos):
        closes_at = int(table["t"][~pos][0])
        ax.axvline(closes_at, color="tab:gray", ls=":", lw=1.0)
        ax.text(0.03, 0.13, f"value 0 at t = {closes_at}", transform=ax.transAxes,
                color="tab:gray")
    ax.set_title(f"record staircase ({table.row_count} records)")
    _save(fig, out_png)
    return {
        "kind": "records",
        "rows": table.row_count,
        "fitted_slope": fitted,
        "closes_at": closes_at,
        "output": out_png,
    }


def plot_samples(in_csv: str, out_png: str, bound=None, slack=None) -> dict:
    """Histogram of sampled exponents against the bound + slack line.

    bound and slack default to the values recorded in the file itself (they
    are constant per run); explicit arguments override.  Samples carrying
    caveat flags are overlaid hatched.  The title reports the within-bound
    fraction over the judged samples (at least 3 records).
    """
    table = read_samples(in_csv)
    bound_val = float(table["bound"][0]) if bound is None else float(bound)
    slack_val = float(table["slack"][0]) if slack is None else float(slack)
    line_x = bound_val + slack_val

    omega = table["omega_hat"]
    finite = omega[np.isfinite(omega)]
    flagged = np.array([bool(f) for f in table["flags"]])

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    if finite.size:
        edges = np.histogram_bin_edges(finite, bins="auto")
        ax.hist(finite, bins=edges, color="tab:blue", alpha=0.75, label="omega_hat")
        caveat = omega[np.isfinite(omega) & flagged]
        if caveat.size:
            ax.hist(caveat, bins=edges, facecolor="none", edgecolor="tab:orange",
                    hatch="///", label="caveat flags")
    if np.isfinite(line_x):
        ax.axvline(line_x, color="tab:red", ls="--", lw=1.5,
                   label=f"bound + slack = {line_x:.3f}")
    ax.set_xlabel("estimated exponent")
    ax.set_ylabel("samples")
    ax.legend(loc="upper right")

    judged = table["records_count"] >= 3
    included = int(np.count_nonzero(judged))
    within = int(np.count_nonzero(table["within_bound"] & judged))
    fraction = within / included if included else 0.0
    ax.set_title(f"within bound: {within}/{included} ({fraction:.0%})")
    _save(fig, out_png)
    return {
        "kind": "samples",
        "samples": table.row_count,
        "bound": bound_val,
        "slack": slack_val,
        "line_x": line_x,
        "within": within,
        "included": included,
        "fraction": fraction,
        "caveat_count": int(np.count_nonzero(flagged)),
        "output": out_png,
    }


def plot_profile(in_csv: str, out_png: str) -> dict:
    """Partial sums of the covering series against T on a log x-axis.

    The classification comment written by the series runner is echoed on the
    figure; boundary classifications render a "numerically undecidable" note
    since no finite horizon can settle them.
    """
    table = read_profile(in_csv)
    classification = table.comments.get("classification", "")
    undecidable = classification.startswith("BOUNDARY")

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.semilogx(table["T"], table["partial_sum"], color="tab:blue", lw=1.5)
    ax.set_xlabel("T")
    ax.set_ylabel("partial sum")
    ax.grid(True, which="both", alpha=0.3)
    label = classification if classification else "unclassified"
    if undecidable:
        label += " (numerically undecidable)"
    ax.set_title(f"covering series: {label}")
    _save(fig, out_png)
    return {
        "kind": "profile",
        "rows": table.row_count,
        "classification": classification,
        "undecidable": undecidable,
        "final_partial": float(table["partial_sum"][-1]),
        "output": out_png,
    }


class PlotKind(enum.Enum):
    RECORDS = "records"
    SAMPLES = "samples"
    PROFILE = "profile"


@dataclass(frozen=True)
class PlotJob:
    """One CSV-to-PNG rendering task."""

    input_csv: str
    kind: PlotKind
    output_path: str
    bound: float | None = None
    slack: float | None = None

    def __post_init__(self):
        if not os.path.exists(self.input_csv):
            raise SchemaError(f"input file does not exist: {self.input_csv}")

    def run(self) -> dict:
        if self.kind is PlotKind.RECORDS:
            return plot_records(self.input_csv, self.output_path)
        if self.kind is PlotKind.SAMPLES:
            return plot_samples(self.input_csv, self.output_path,
                                bound=self.bound, slack=self.slack)
        return plot_profile(self.input_csv, self.output_path)
