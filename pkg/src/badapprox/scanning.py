"""Chunked lattice scans shared by the measure functions and record tables.

The driver walks sup-norm annuli (0,1], (1,2], (2,4], ... up to t_max.  Each
stage enumerates only integer points whose value can still matter: a point is
kept when its value is <= the champion value entering the stage (ties
included, they can improve the witness).  Per-row residual radii use the sound
conversion |residual_i| <= kappa_i * distance, so no candidate at or below the
bound is ever excluded; every survivor is then re-evaluated with the exact
value function, which keeps engine results bitwise equal to the box oracle.

Candidates merge shell by shell under the total order (value, canonical
witness), so results do not depend on chunk sizes or enumeration order.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .geometry import ZERO_SNAP_FACTOR, FormMatrix, Subspace, distances_to_subspace


def _fraction(v) -> Fraction:
    """Exact rational value of an int or float entry (floats are dyadic)."""
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    return Fraction(*float(v).as_integer_ratio())


def in_rational_span(span_rows, z) -> bool:
    """Exact membership of an integer vector in the rational row span.

    Row entries may be ints or floats; both are exact rationals, so the
    reduction decides true linear membership, not a float approximation.
    """

    def reduce(vec, basis):
        for piv, brow in basis:
            coef = vec[piv]
            if coef:
                vec = [v - coef * b for v, b in zip(vec, brow)]
        return vec

    basis = []
    for row in span_rows:
        vec = reduce([_fraction(v) for v in row], basis)
        piv = next((i for i, v in enumerate(vec) if v), None)
        if piv is not None:
            lead = vec[piv]
            basis.append((piv, [v / lead for v in vec]))
    return not any(reduce([_fraction(v) for v in z], basis))


def rational_span_distance(span_rows, z) -> float:
    """Exact Euclidean distance from an integer point to a rational row span.

    Solves the normal equations over Fractions: with S the span rows, G = S S^T
    and b = S z, the squared distance is z.z - b.w where G w = b.  Used only
    for the rare candidates whose float distance rounded all the way to 0.
    """
    S = [[_fraction(v) for v in row] for row in span_rows]
    zf = [_fraction(v) for v in z]
    k = len(S)
    G = [[sum(ri * rj for ri, rj in zip(S[i], S[j])) for j in range(k)] for i in range(k)]
    b = [sum(ri * zi for ri, zi in zip(S[i], zf)) for i in range(k)]
    # Gaussian elimination with exact pivots; G is positive definite.
    for col in range(k):
        piv = next(r for r in range(col, k) if G[r][col])
        G[col], G[piv] = G[piv], G[col]
        b[col], b[piv] = b[piv], b[col]
        lead = G[col][col]
        for r in range(col + 1, k):
            f = G[r][col] / lead
            if f:
                G[r] = [a - f * c for a, c in zip(G[r], G[col])]
                b[r] = b[r] - f * b[col]
    w = [Fraction(0)] * k
    for r in range(k - 1, -1, -1):
        acc = b[r] - sum(G[r][j] * w[j] for j in range(r + 1, k))
        w[r] = acc / G[r][r]
    dist2 = sum(v * v for v in zf) - sum(bi * wi for bi, wi in zip(b, w))
    return math.sqrt(float(max(dist2, Fraction(0))))

# Completeness slack for the approximate fractional-part filter.  Filter
# arithmetic on |theta| * t <= ~1e7 inputs is exact to ~1e-9, survivors are
# re-checked exactly, so the slack only costs a few extra candidates.
FILTER_SLACK = 1e-8

# Above this half-width the fractional filter keeps everything anyway; fall
# back to the plain box enumeration for the stage.
FILTER_LIMIT = 0.45

_CHUNK = 1 << 18
_EXPAND_ROWS = 1 << 21


class BudgetSignal(Exception):
    """Internal: node budget exhausted mid-scan."""


class Budget:
    __slots__ = ("remaining",)

    def __init__(self, nodes: float):
        self.remaining = int(nodes)

    def charge(self, n: int) -> None:
        self.remaining -= int(n)
        if self.remaining < 0:
            raise BudgetSignal()


def nearest_int_dist(a: np.ndarray) -> np.ndarray:
    """Distance to the nearest integer, elementwise; always in [0, 1/2]."""
    return np.abs(a - np.rint(a))


def canonicalize(wits: np.ndarray) -> np.ndarray:
    """Flip rows so the first nonzero coordinate is positive (copy)."""
    w = np.array(wits, dtype=np.int64, copy=True)
    if w.ndim == 1:
        w = w[None, :]
    nz = w != 0
    first = np.argmax(nz, axis=1)
    lead = np.take_along_axis(w, first[:, None], axis=1)[:, 0]
    flip = lead < 0
    w[flip] = -w[flip]
    return w


def _lex_min_rows(w: np.ndarray) -> tuple[int, ...]:
    """Lexicographically smallest row of an int matrix, as a tuple."""
    return min(tuple(int(v) for v in row) for row in w)


def _ragged_take(starts: np.ndarray, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Expand per-row [start, start+count) ranges into (row_index, flat_index) pairs."""
    total = int(counts.sum())
    rows = np.repeat(np.arange(starts.size), counts)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    flat = np.arange(total) - offsets[rows] + starts[rows]
    return rows, flat


def _box_chunks(hi: int, dims: int):
    """Yield int64 coordinate chunks covering the full box [-hi, hi]^dims."""
    side = 2 * hi + 1
    total = side**dims
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        flat = np.arange(start, stop, dtype=np.int64)
        coords = np.empty((stop - start, dims), dtype=np.int64)
        for j in range(dims - 1, -1, -1):
            coords[:, j] = flat % side - hi
            flat //= side
        yield coords


def _fractional_matches(
    pivot_vals: np.ndarray,
    order: np.ndarray,
    ext: np.ndarray,
    targets: np.ndarray,
    rho: float,
):
    """Indices of pivot values whose fractional part is within rho of each target.

    ext is the sorted fractional array concatenated with itself + 1, so every
    wrapped interval becomes one contiguous slice. Returns (row, pivot_index).
    """
    lo_edge = targets - rho
    hi_edge = targets + rho
    wrap = lo_edge < 0
    lo_edge[wrap] += 1.0
    hi_edge[wrap] += 1.0
    starts = np.searchsorted(ext, lo_edge, side="left")
    ends = np.searchsorted(ext, hi_edge, side="right")
    rows, flat = _ragged_take(starts, np.maximum(ends - starts, 0))
    n = order.size
    flat[flat >= n] -= n
    return rows, order[flat]


class MatrixScanner:
    """Scans x in Z^m for the linear-forms value max_j ||(theta x)_j||."""

    def __init__(self, theta: FormMatrix):
        self.theta = theta
        self.entries = theta.entries
        self.n, self.m = theta.rows, theta.cols
        self.witness_dim = self.m
        flat = int(np.argmax(np.abs(self.entries)))
        self.pivot_row, self.pivot_col = divmod(flat, self.m)
        self.pivot_coef = float(self.entries[self.pivot_row, self.pivot_col])
        self.describe = f"linear forms {self.n}x{self.m}"
        # Dot products of length m carry absolute rounding error up to about
        # m * eps * max|x| * L1(row); computed values at or below that may be
        # rounding artifacts of a true zero (or vice versa), so they get
        # re-evaluated in exact rational arithmetic (doubles are rationals).
        row_l1 = float(np.abs(self.entries).sum(axis=1).max())
        self._tiny_per_x = 256.0 * np.finfo(np.float64).eps * self.m * max(1.0, row_l1)
        self._exact_rows = None

    def seed_bound(self) -> float:
        # Axis vectors e_j are shell-1 points, so min_j value(e_j) bounds every
        # psi(t); using it as the stage filter bound is sound at all shells.
        return float(nearest_int_dist(self.entries).max(axis=0).min())

    def _exact_value(self, x_row) -> float:
        from fractions import Fraction

        if self._exact_rows is None:
            self._exact_rows = [[Fraction(float(v)) for v in row] for row in self.entries]
        worst = Fraction(0)
        ints = [int(v) for v in x_row]
        for row in self._exact_rows:
            dot = sum(coef * xi for coef, xi in zip(row, ints))
            dist = abs(dot - round(dot))
            if dist > worst:
                worst = dist
        return float(worst)

    def values(self, x: np.ndarray) -> np.ndarray:
        prods = x.astype(np.float64) @ self.entries.T
        vals = nearest_int_dist(prods).max(axis=1)
        if vals.size:
            sus = np.nonzero(vals <= self._tiny_per_x * np.abs(x).max(axis=1))[0]
            for i in sus:
                vals[i] = self._exact_value(x[i])
        return vals

    def collect(self, lo: int, hi: int, bound: float, budget: Budget):
        if self.m == 1:
            return self._collect_1d(lo, hi, bound, budget)
        rho = bound + FILTER_SLACK
        if abs(self.pivot_coef) < 1e-12 or not rho < FILTER_LIMIT:
            return self._collect_box(lo, hi, bound, budget)
        return self._collect_filtered(lo, hi, bound, budget, rho)

    def _collect_1d(self, lo, hi, bound, budget):
        budget.charge(hi - lo)
        x = np.arange(lo + 1, hi + 1, dtype=np.int64)[:, None]
        vals = self.values(x)
        keep = vals <= bound
        return x[keep].max(axis=1), vals[keep], x[keep]

    def _collect_box(self, lo, hi, bound, budget):
        shells_out, vals_out, wits_out = [], [], []
        for coords in _box_chunks(hi, self.m):
            budget.charge(len(coords))
            shells = np.abs(coords).max(axis=1)
            mask = shells > lo
            coords, shells = coords[mask], shells[mask]
            if not len(coords):
                continue
            vals = self.values(coords)
            keep = vals <= bound
            shells_out.append(shells[keep])
            vals_out.append(vals[keep])
            wits_out.append(coords[keep])
        return _concat(shells_out, vals_out, wits_out, self.m)

    def _collect_filtered(self, lo, hi, bound, budget, rho):
        pr, pc = self.pivot_row, self.pivot_col
        pivot_range = np.arange(-hi, hi + 1, dtype=np.int64)
        fracs = np.mod(self.pivot_coef * pivot_range, 1.0)
        order = np.argsort(fracs, kind="stable")
        ext = np.concatenate([fracs[order], fracs[order] + 1.0])
        other_cols = [j for j in range(self.m) if j != pc]
        other_coefs = self.entries[pr, other_cols]
        shells_out, vals_out, wits_out = [], [], []
        for outer in _box_chunks(hi, self.m - 1):
            budget.charge(len(outer))
            targets = np.mod(-(outer.astype(np.float64) @ other_coefs), 1.0)
            rows, piv_idx = _fractional_matches(fracs, order, ext, targets, rho)
            budget.charge(len(rows))
            if not len(rows):
                continue
            x = np.empty((len(rows), self.m), dtype=np.int64)
            x[:, other_cols] = outer[rows]
            x[:, pc] = pivot_range[piv_idx]
            shells = np.abs(x).max(axis=1)
            mask = shells > lo
            x, shells = x[mask], shells[mask]
            if not len(x):
                continue
            vals = self.values(x)
            keep = vals <= bound
            shells_out.append(shells[keep])
            vals_out.append(vals[keep])
            wits_out.append(x[keep])
        return _concat(shells_out, vals_out, wits_out, self.m)


class SubspaceScanner:
    """Scans z in Z^d for the Euclidean distance to a subspace in graph form."""

    def __init__(self, space: Subspace):
        self.space = space
        gf = space.graph_form
        self.gf = gf
        self.theta = gf.theta.entries  # (d-k, k)
        self.kappas = gf.kappas
        self.k = space.dim
        self.d = space.ambient_dim
        flat = int(np.argmax(np.abs(self.theta)))
        self.pivot_row, self.pivot_col = divmod(flat, self.k)
        self.pivot_coef = float(self.theta[self.pivot_row, self.pivot_col])
        self.witness_dim = self.d
        self.describe = space.label
        # Distances at float-noise scale are decided exactly: against the
        # integer span when the subspace carries one, and otherwise against
        # the float basis itself (every float is an exact rational).  A value
        # of exactly 0 therefore never comes from rounding alone.
        self._snap = ZERO_SNAP_FACTOR * self.d * np.finfo(np.float64).eps
        int_span = getattr(space, "int_span", None)
        self._span_rows = int_span if int_span is not None else space.basis.T

    def seed_bound(self) -> float:
        axes = np.eye(self.d, dtype=np.float64)
        return float(distances_to_subspace(axes, self.space).min())

    def values(self, z: np.ndarray) -> np.ndarray:
        vals = distances_to_subspace(z, self.space)
        if vals.size:
            zf = np.asarray(z, dtype=np.float64)
            norms = np.sqrt(np.einsum("ij,ij->i", zf, zf))
            for i in np.nonzero(vals <= self._snap * norms)[0]:
                if in_rational_span(self._span_rows, z[i]):
                    vals[i] = 0.0
                elif vals[i] == 0.0:
                    vals[i] = rational_span_distance(self._span_rows, z[i])
        return vals

    def collect(self, lo: int, hi: int, bound: float, budget: Budget):
        rho = bound * self.kappas[self.pivot_row] + FILTER_SLACK
        if self.k == 1:
            return self._collect_free_1d(lo, hi, bound, budget)
        if abs(self.pivot_coef) < 1e-12 or not rho < FILTER_LIMIT:
            return self._collect_box(lo, hi, bound, budget)
        return self._collect_filtered(lo, hi, bound, budget, rho)

    def _expand(self, x: np.ndarray, lo, hi, bound, budget):
        """All candidate points over free coords x; exact value filter at bound."""
        if not len(x):
            return _concat([], [], [], self.d)
        affine = x.astype(np.float64) @ self.theta.T
        radii = bound * self.kappas + FILTER_SLACK
        dd = np.floor(radii + 0.5).astype(np.int64)
        dd = np.minimum(dd, 2 * hi)  # dependent coords are capped at |y| <= hi anyway
        grids = np.meshgrid(*(np.arange(-int(v), int(v) + 1) for v in dd), indexing="ij")
        offsets = np.stack([g.ravel() for g in grids], axis=1)  # (C, d-k)
        budget.charge(len(x) * len(offsets))
        base = np.rint(affine).astype(np.int64)
        shells_out, vals_out, wits_out = [], [], []
        step = max(1, _EXPAND_ROWS // max(1, len(offsets)))
        for start in range(0, len(x), step):
            xs = x[start : start + step]
            ys = base[start : start + step, None, :] + offsets[None, :, :]
            xs_rep = np.repeat(xs, len(offsets), axis=0)
            ys = ys.reshape(-1, self.d - self.k)
            ok = (np.abs(ys) <= hi).all(axis=1)
            xs_rep, ys = xs_rep[ok], ys[ok]
            if not len(xs_rep):
                continue
            z = self.gf.assemble(xs_rep, ys)
            shells = np.abs(z).max(axis=1)
            mask = shells > lo
            z, shells = z[mask], shells[mask]
            if not len(z):
                continue
            vals = self.values(z)
            keep = vals <= bound
            shells_out.append(shells[keep])
            vals_out.append(vals[keep])
            wits_out.append(z[keep])
        return _concat(shells_out, vals_out, wits_out, self.d)

    def _collect_free_1d(self, lo, hi, bound, budget):
        budget.charge(2 * hi + 1)
        x = np.arange(-hi, hi + 1, dtype=np.int64)[:, None]
        rho = bound * self.kappas[self.pivot_row] + FILTER_SLACK
        if rho < FILTER_LIMIT and abs(self.pivot_coef) >= 1e-12:
            keep = nearest_int_dist(self.pivot_coef * x[:, 0]) <= rho
            x = x[keep]
        return self._expand(x, lo, hi, bound, budget)

    def _collect_box(self, lo, hi, bound, budget):
        parts = []
        for coords in _box_chunks(hi, self.k):
            budget.charge(len(coords))
            parts.append(self._expand(coords, lo, hi, bound, budget))
        return _merge_parts(parts, self.d)

    def _collect_filtered(self, lo, hi, bound, budget, rho):
        pr, pc = self.pivot_row, self.pivot_col
        pivot_range = np.arange(-hi, hi + 1, dtype=np.int64)
        fracs = np.mod(self.pivot_coef * pivot_range, 1.0)
        order = np.argsort(fracs, kind="stable")
        ext = np.concatenate([fracs[order], fracs[order] + 1.0])
        other_cols = [j for j in range(self.k) if j != pc]
        other_coefs = self.theta[pr, other_cols]
        parts = []
        for outer in _box_chunks(hi, self.k - 1):
            budget.charge(len(outer))
            targets = np.mod(-(outer.astype(np.float64) @ other_coefs), 1.0)
            rows, piv_idx = _fractional_matches(fracs, order, ext, targets, rho)
            budget.charge(len(rows))
            if not len(rows):
                continue
            x = np.empty((len(rows), self.k), dtype=np.int64)
            x[:, other_cols] = outer[rows]
            x[:, pc] = pivot_range[piv_idx]
            parts.append(self._expand(x, lo, hi, bound, budget))
        return _merge_parts(parts, self.d)


def _concat(shells, vals, wits, dim):
    if not shells:
        return (
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.float64),
            np.empty((0, dim), dtype=np.int64),
        )
    return np.concatenate(shells), np.concatenate(vals), np.concatenate(wits)


def _merge_parts(parts, dim):
    if not parts:
        return _concat([], [], [], dim)
    return (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
    )


def scan_updates(scanner, t_max: int, node_budget: float):
    """Walk annuli to t_max tracking the champion (value, canonical witness).

    Returns (updates, t_scanned, closed_at_zero, budget_exceeded) where updates
    is a list of (shell, value, witness_tuple) champion improvements in shell
    order. Improvements include equal-value, lexicographically smaller
    witnesses, so the updates determine the measure function AND its tie-broken
    witness at every t <= t_scanned. Record tables keep only strict value drops.
    """
    budget = Budget(node_budget)
    seed = scanner.seed_bound()
    updates: list[tuple[int, float, tuple[int, ...]]] = []
    champ_v = np.inf
    champ_w: tuple[int, ...] | None = None
    closed = False
    scanned = 0
    exceeded = False
    lo = 0
    try:
        while lo < t_max:
            hi = min(2 * lo, t_max) if lo else 1
            bound = min(champ_v, seed)
            shells, vals, wits = scanner.collect(lo, hi, bound, budget)
            if len(shells):
                order = np.lexsort((vals, shells))
                shells, vals, wits = shells[order], vals[order], wits[order]
                edges = np.searchsorted(shells, np.unique(shells), side="left")
                bounds_right = np.append(edges[1:], len(shells))
                for gstart, gend in zip(edges, bounds_right):
                    vmin = vals[gstart]
                    tie_end = gstart + int(np.searchsorted(vals[gstart:gend], vmin, side="right"))
                    best_w = _lex_min_rows(canonicalize(wits[gstart:tie_end]))
                    if vmin < champ_v or (vmin == champ_v and (champ_w is None or best_w < champ_w)):
                        champ_v = float(vmin)
                        champ_w = best_w
                        updates.append((int(shells[gstart]), champ_v, champ_w))
                        if champ_v == 0.0:
                            # Value can only stay 0 from here, but the scan
                            # continues: a later shell may hold a lex-smaller
                            # zero witness, and the tie-break is over the whole
                            # range. With bound 0 the stages prune to exact
                            # lattice hits, so the tail is cheap.
                            closed = True
            scanned = hi
            lo = hi
    except BudgetSignal:
        exceeded = True
    return updates, scanned, closed, exceeded
