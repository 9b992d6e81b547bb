"""Exponent estimation from record tables.

The exponent of a subject is sup{tau : liminf t^tau psi(t) finite}.  Any
finite table only bounds it, so estimates carry diagnostics and caveat flags
rather than pretending to converge.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import RecordTable
from .errors import InsufficientData, ZeroValueSubject


class EstimateMethod(enum.Enum):
    TAIL_SLOPE = "tail_slope"
    MAX_RATIO = "max_ratio"


TOO_FEW_RECORDS = "TOO_FEW_RECORDS"
ZERO_VALUE_SUBJECT = "ZERO_VALUE_SUBJECT"


@dataclass(frozen=True)
class ExponentEstimate:
    omega_hat: float
    method: EstimateMethod
    window: int
    residual: float
    records_used: int
    caveat_flags: frozenset = field(default_factory=frozenset)


def _log_pairs(table: RecordTable):
    """(log t_{k+1}, -log value_k) for consecutive positive records.

    value_k rules psi on [t_k, t_{k+1}), so the quality/height ratio that the
    exponent compares is value_k against the *next* record time; the final
    record has no successor and contributes no pair.
    """
    recs = table.positive_records()
    xs = [math.log(recs[k + 1].t) for k in range(len(recs) - 1)]
    ys = [-math.log(recs[k].value) for k in range(len(recs) - 1)]
    return np.array(xs), np.array(ys)


def estimate_exponent(
    table: RecordTable,
    method: EstimateMethod = EstimateMethod.TAIL_SLOPE,
    window: int | None = None,
) -> ExponentEstimate:
    """Estimate the exponent from the trailing `window` record pairs.

    TAIL_SLOPE fits -log value against log t_next by least squares over the
    window; MAX_RATIO takes the max of the pointwise ratios there, a crude
    floor that matches TAIL_SLOPE exactly on pure power-law data.  Defaults
    to window = min(10, half the record count): the exponent is a tail
    property and early records bias the slope.
    """
    if table.contains_integer_points:
        raise ZeroValueSubject("table closed at value 0; exponent is infinite")
    recs = table.positive_records()
    if len(recs) < 2:
        raise InsufficientData(f"need at least 2 positive records, have {len(recs)}")
    if window is None:
        window = min(10, max(2, len(recs) // 2))
    if window < 2:
        raise InsufficientData(f"window must be at least 2, got {window}")
    xs, ys = _log_pairs(table)
    flags = set()
    if window > len(xs):
        window = len(xs)
        flags.add(TOO_FEW_RECORDS)
    xs, ys = xs[-window:], ys[-window:]
    if method is EstimateMethod.MAX_RATIO:
        ratios = ys / xs
        omega = float(ratios.max())
        resid = 0.0
    elif len(xs) == 1:
        omega = float(ys[0] / xs[0])
        resid = 0.0
        flags.add(TOO_FEW_RECORDS)
    else:
        slope, intercept = np.polyfit(xs, ys, 1)
        omega = float(slope)
        resid = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    return ExponentEstimate(
        omega_hat=omega,
        method=method,
        window=int(window),
        residual=resid,
        records_used=len(recs),
        caveat_flags=frozenset(flags),
    )


def liminf_profile(table: RecordTable, tau: float) -> list[tuple[int, float]]:
    """[(t_k, t_k^tau * value_k)]: the running quantity whose liminf gates tau.

    t^tau psi(t) grows within each record interval (psi is constant there), so
    its infimum over [t_k, t_{k+1}) sits at the left endpoint; sampling at t_k
    traces the liminf.  Bounded profile means tau <= omega, divergence means
    tau > omega is still possible.
    """
    recs = table.positive_records()
    if not recs:
        raise InsufficientData("profile needs at least one positive record")
    return [(r.t, float(r.t**tau * r.value)) for r in recs]
