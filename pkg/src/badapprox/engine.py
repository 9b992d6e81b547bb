"""Measure functions, record tables, and lattice counts near subspaces.

The matrix measure of an n x m system of linear forms at radius t is the
smallest value of max_j ||(theta x)_j|| over nonzero integer x with
|x|_sup <= t, where ||.|| is the distance to the nearest integer.  The
subspace measure replaces the form value with the Euclidean distance from an
integer point z to the subspace.  Ties break to the lexicographically smallest
witness whose first nonzero coordinate is positive.

Two norm-range conventions are supported: INCLUSIVE_UPPER takes 1 <= |.| <= t,
STRICT_UPPER takes 1 <= |.| < t, so strict values at t equal inclusive values
at t - 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import BudgetExceeded, EmptyRange, ShapeError
from .geometry import FormMatrix, Subspace, distances_to_subspace
from .scanning import (
    Budget,
    BudgetSignal,
    MatrixScanner,
    SubspaceScanner,
    _box_chunks,
    canonicalize,
    scan_updates,
)

DEFAULT_NODE_BUDGET = 10**8


class NormConvention(enum.Enum):
    INCLUSIVE_UPPER = "inclusive"
    STRICT_UPPER = "strict"


class Best(NamedTuple):
    value: float
    witness: np.ndarray


@dataclass(frozen=True)
class Record:
    t: int
    value: float
    witness: np.ndarray


@dataclass(frozen=True)
class RecordTable:
    """Strictly dropping values of a measure function with their witnesses.

    The step function induced by the records reproduces the measure at every
    integer t <= t_max_scanned. A value of exactly 0 closes the table: the
    subject contains nonzero integer points and the measure stays 0.
    """

    subject: str
    convention: NormConvention
    records: tuple[Record, ...]
    t_max_scanned: int
    contains_integer_points: bool

    def value_at(self, t: int) -> float:
        idx = self._index_at(t)
        return math.inf if idx < 0 else self.records[idx].value

    def witness_at(self, t: int) -> np.ndarray | None:
        idx = self._index_at(t)
        return None if idx < 0 else self.records[idx].witness

    def _index_at(self, t: int) -> int:
        if t > self.t_max_scanned:
            raise ValueError(f"t={t} beyond scanned range {self.t_max_scanned}")
        idx = -1
        for i, rec in enumerate(self.records):
            if rec.t <= t:
                idx = i
        return idx

    def positive_records(self) -> tuple[Record, ...]:
        return tuple(r for r in self.records if r.value > 0.0)


class MeasureSweep:
    """Measure values and tie-broken witnesses at every t in one scan."""

    def __init__(self, updates, t_max_scanned: int, convention: NormConvention):
        self.convention = convention
        self.t_max_scanned = t_max_scanned
        shift = 1 if convention is NormConvention.STRICT_UPPER else 0
        self._ts = [u[0] + shift for u in updates]
        self._values = [u[1] for u in updates]
        self._witnesses = [np.array(u[2], dtype=np.int64) for u in updates]

    def value_at(self, t: int) -> float:
        idx = self._index_at(t)
        return math.inf if idx < 0 else self._values[idx]

    def witness_at(self, t: int) -> np.ndarray | None:
        idx = self._index_at(t)
        return None if idx < 0 else self._witnesses[idx]

    def _index_at(self, t: int) -> int:
        if t > self.t_max_scanned:
            raise ValueError(f"t={t} beyond scanned range {self.t_max_scanned}")
        lo, hi = 0, len(self._ts)
        while lo < hi:
            mid = (lo + hi) // 2
            if self._ts[mid] <= t:
                lo = mid + 1
            else:
                hi = mid
        return lo - 1


def _scanner_for(subject):
    if isinstance(subject, FormMatrix):
        return MatrixScanner(subject)
    if isinstance(subject, Subspace):
        return SubspaceScanner(subject)
    raise ShapeError(f"subject must be FormMatrix or Subspace, got {type(subject)!r}")


def _inclusive_horizon(t: int, convention: NormConvention) -> int:
    """Largest sup-norm actually admitted; EmptyRange when no nonzero point fits."""
    if convention is NormConvention.STRICT_UPPER:
        horizon = int(t) - 1
    else:
        horizon = int(t)
    if horizon < 1:
        raise EmptyRange(f"no nonzero integer point with norm in range at t={t} ({convention.value})")
    return horizon


def measure(
    subject,
    t: int,
    convention: NormConvention = NormConvention.INCLUSIVE_UPPER,
    node_budget: float = DEFAULT_NODE_BUDGET,
) -> Best:
    """Measure value and tie-broken witness of a matrix or subspace at radius t."""
    horizon = _inclusive_horizon(t, convention)
    scanner = _scanner_for(subject)
    updates, scanned, _closed, exceeded = scan_updates(scanner, horizon, node_budget)
    if exceeded:
        raise BudgetExceeded(f"node budget exhausted at t={scanned} of {horizon}")
    shell, value, witness = updates[-1]
    return Best(value=value, witness=np.array(witness, dtype=np.int64))


def matrix_measure(theta: FormMatrix, t: int, convention=NormConvention.INCLUSIVE_UPPER) -> Best:
    return measure(theta, t, convention)


def subspace_measure(space: Subspace, t: int, convention=NormConvention.INCLUSIVE_UPPER) -> Best:
    return measure(space, t, convention)


def measure_sweep(
    subject,
    t_max: int,
    convention: NormConvention = NormConvention.INCLUSIVE_UPPER,
    node_budget: float = DEFAULT_NODE_BUDGET,
) -> MeasureSweep:
    """One scan giving measure values and witnesses for every t up to t_max."""
    horizon = _inclusive_horizon(t_max, convention)
    scanner = _scanner_for(subject)
    updates, scanned, _closed, exceeded = scan_updates(scanner, horizon, node_budget)
    shift = 1 if convention is NormConvention.STRICT_UPPER else 0
    sweep = MeasureSweep(updates, scanned + shift, convention)
    if exceeded:
        raise BudgetExceeded(f"node budget exhausted at t={scanned + shift}", partial=sweep)
    return sweep


def record_table(
    subject,
    t_max: int,
    convention: NormConvention = NormConvention.INCLUSIVE_UPPER,
    node_budget: float = DEFAULT_NODE_BUDGET,
) -> RecordTable:
    """All strict drops of the measure function up to t_max (convention argument).

    Raises BudgetExceeded carrying the partial table (records completed so far,
    t_max_scanned marking how far the scan is authoritative).
    """
    horizon = _inclusive_horizon(t_max, convention)
    scanner = _scanner_for(subject)
    updates, scanned, closed, exceeded = scan_updates(scanner, horizon, node_budget)
    shift = 1 if convention is NormConvention.STRICT_UPPER else 0
    records = []
    last = math.inf
    for shell, value, witness in updates:
        if value < last:
            w = np.array(witness, dtype=np.int64)
            w.setflags(write=False)
            records.append(Record(t=shell + shift, value=value, witness=w))
            last = value
    table = RecordTable(
        subject=scanner.describe,
        convention=convention,
        records=tuple(records),
        t_max_scanned=scanned + shift,
        contains_integer_points=closed,
    )
    if exceeded:
        raise BudgetExceeded(
            f"node budget exhausted; table authoritative to t={table.t_max_scanned}",
            partial=table,
        )
    return table


def brute_force_measure(
    subject,
    t: int,
    convention: NormConvention = NormConvention.INCLUSIVE_UPPER,
    node_limit: float = 10**9,
) -> Best:
    """Plain box-scan oracle: same value functions, no pruning, no staging."""
    horizon = _inclusive_horizon(t, convention)
    if isinstance(subject, FormMatrix):
        dims = subject.cols
        value_fn = MatrixScanner(subject).values
    elif isinstance(subject, Subspace):
        dims = subject.ambient_dim
        value_fn = SubspaceScanner(subject).values
    else:
        raise ShapeError(f"subject must be FormMatrix or Subspace, got {type(subject)!r}")
    if (2 * horizon + 1) ** dims > node_limit:
        raise BudgetExceeded(f"box of size (2*{horizon}+1)^{dims} exceeds node limit {node_limit:g}")
    best_v = math.inf
    best_w: tuple[int, ...] | None = None
    for coords in _box_chunks(horizon, dims):
        shells = np.abs(coords).max(axis=1)
        coords = coords[shells > 0]
        if not len(coords):
            continue
        vals = value_fn(coords)
        vmin = float(vals.min())
        if vmin > best_v:
            continue
        ties = coords[vals == vmin]
        w = min(tuple(int(v) for v in row) for row in canonicalize(ties))
        if vmin < best_v or (best_w is not None and w < best_w):
            best_v, best_w = vmin, w
    return Best(value=best_v, witness=np.array(best_w, dtype=np.int64))


def _eval_decay(fn: Callable, arg):
    """Evaluate a decay function on a scalar or array argument."""
    arr = np.asarray(arg, dtype=np.float64)
    out = fn(arr)
    return np.asarray(out, dtype=np.float64)


def count_near_shell(
    space: Subspace,
    phi: Callable,
    T: int,
    node_budget: float = DEFAULT_NODE_BUDGET,
) -> int:
    """Number of integer z with |z|_sup = T and dist(z, space) <= phi(T)."""
    if T < 1:
        raise EmptyRange(f"shell T={T} holds no nonzero point")
    threshold = float(_eval_decay(phi, float(T)))
    scanner = SubspaceScanner(space)
    budget = Budget(node_budget)
    try:
        shells, vals, _ = scanner.collect(T - 1, T, max(threshold, 0.0), budget)
    except BudgetSignal:
        raise BudgetExceeded(f"node budget exhausted counting shell T={T}") from None
    return int(np.count_nonzero((shells == T) & (vals <= threshold)))


def count_near_annulus(
    space: Subspace,
    phi: Callable,
    T: int,
    node_budget: float = DEFAULT_NODE_BUDGET,
) -> int:
    """Number of integer z with T/2 < |z|_sup <= T and dist(z, space) <= phi(|z|)."""
    if T < 1:
        raise EmptyRange(f"annulus at T={T} holds no nonzero point")
    lo = T // 2
    shells_range = np.arange(lo + 1, T + 1, dtype=np.float64)
    thresholds = _eval_decay(phi, shells_range)
    bound = float(thresholds.max())
    scanner = SubspaceScanner(space)
    budget = Budget(node_budget)
    try:
        shells, vals, _ = scanner.collect(lo, T, max(bound, 0.0), budget)
    except BudgetSignal:
        raise BudgetExceeded(f"node budget exhausted counting annulus T={T}") from None
    per_point = thresholds[shells - (lo + 1)]
    return int(np.count_nonzero(vals <= per_point))


def neighborhood_lattice_points(
    space: Subspace,
    psi: Callable,
    T: float,
    shift=None,
    scale: float = 1.0,
    node_budget: float = DEFAULT_NODE_BUDGET,
) -> np.ndarray:
    """Integer points of the scaled, shifted psi(T)-neighborhood of the subspace.

    Returns all z in Z^d with |z - shift|_sup <= scale*T and
    dist(z - shift, space) <= scale*psi(T), sorted lexicographically.
    """
    if T < 1:
        raise EmptyRange(f"need T >= 1, got {T}")
    if not 0 < scale <= 1:
        raise ShapeError(f"scale must be in (0, 1], got {scale}")
    d = space.ambient_dim
    if shift is None:
        shift = np.zeros(d)
    shift = np.asarray(shift, dtype=np.float64)
    if shift.shape != (d,):
        raise ShapeError(f"shift has shape {shift.shape}, ambient dim is {d}")
    dist_cap = scale * float(_eval_decay(psi, float(T)))
    box_cap = scale * float(T)
    gf = space.graph_form
    theta = gf.theta.entries
    kappas = gf.kappas
    budget = Budget(node_budget)

    free_shift = shift[list(gf.free)]
    dep_shift = shift[list(gf.dep)]
    axes = []
    for i in range(space.dim):
        lo = math.ceil(free_shift[i] - box_cap - 1e-9)
        hi = math.floor(free_shift[i] + box_cap + 1e-9)
        axes.append(np.arange(lo, hi + 1, dtype=np.int64))
    total = 1
    for ax in axes:
        total *= ax.size
    try:
        budget.charge(total)
    except BudgetSignal:
        raise BudgetExceeded("free-coordinate box exceeds node budget") from None
    grids = np.meshgrid(*axes, indexing="ij") if axes else []
    x = np.stack([g.ravel() for g in grids], axis=1) if axes else np.empty((1, 0), np.int64)

    w_free = x.astype(np.float64) - free_shift
    centers = w_free @ theta.T + dep_shift
    radii = kappas * dist_cap + 1e-9
    dd = np.floor(radii + 0.5).astype(np.int64)
    grids = np.meshgrid(*(np.arange(-int(v), int(v) + 1) for v in dd), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=1)
    try:
        budget.charge(len(x) * len(offsets))
    except BudgetSignal:
        raise BudgetExceeded("dependent-coordinate expansion exceeds node budget") from None
    base = np.rint(centers).astype(np.int64)
    y = (base[:, None, :] + offsets[None, :, :]).reshape(-1, d - space.dim)
    x_rep = np.repeat(x, len(offsets), axis=0)
    z = gf.assemble(x_rep, y)
    w = z.astype(np.float64) - shift
    sup = np.abs(w).max(axis=1)
    mask = sup <= box_cap
    z, w = z[mask], w[mask]
    if len(z):
        dvals = distances_to_subspace(w, space)
        z = z[dvals <= dist_cap]
    order = np.lexsort(z.T[::-1])
    return z[order]
