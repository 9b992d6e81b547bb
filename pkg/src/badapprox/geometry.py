"""Subspaces of R^d, orthonormal bases, projectors, and graph parametrizations.

A k-dimensional subspace is stored as an orthonormal basis (columns of a d x k
matrix) with its cached orthogonal projector.  Integer points stay exact int64;
everything real is float64.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import DimensionError, RankDeficient, ShapeError

# Rank decisions in orthonormal_subspace: singular/diagonal entries below
# RANK_RTOL times the largest column norm count as zero.
RANK_RTOL = 1e-10

# Distances below ZERO_SNAP_FACTOR * d * eps * |z|_2 are indistinguishable
# from float noise; the scanner re-verifies such points exactly against
# integer span data (when the subspace carries it) before ever reporting a
# value of exactly 0.0.
ZERO_SNAP_FACTOR = 32.0


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class Subspace:
    """Immutable proper linear subspace of R^d with an orthonormal basis."""

    # Set by constructions.rational_subspace: int_span rows are exact integer
    # spanning vectors, letting the scanner decide true membership of lattice
    # points in rational arithmetic instead of trusting float distances.
    rational = False
    int_span = None

    def __init__(self, basis: np.ndarray, label: str = ""):
        basis = np.asarray(basis, dtype=np.float64)
        if basis.ndim != 2:
            raise ShapeError(f"basis must be d x k, got shape {basis.shape}")
        d, k = basis.shape
        if not 0 < k < d:
            raise DimensionError(f"need 0 < dim < ambient, got dim={k}, ambient={d}")
        gram = basis.T @ basis
        if not np.allclose(gram, np.eye(k), atol=1e-10):
            raise RankDeficient("basis columns are not orthonormal within 1e-10")
        self.ambient_dim = d
        self.dim = k
        self.basis = _readonly(basis)
        self.projector = _readonly(basis @ basis.T)
        self.label = label or f"subspace dim {k} in R^{d}"

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim}, label={self.label!r})"

    def contains(self, z, tol: float = 1e-9) -> bool:
        z = np.asarray(z, dtype=np.float64)
        return float(np.linalg.norm(z - self.projector @ z)) <= tol * max(1.0, float(np.linalg.norm(z)))

    @cached_property
    def graph_form(self) -> "GraphForm":
        return select_graph_coordinates(self)


@dataclass(frozen=True)
class FormMatrix:
    """Real n x m matrix, read as a system of n linear forms in m variables.

    The same object parametrizes the graph subspace {(x, y) : y = entries @ x}.
    entry_bound, when given, certifies all entries lie in [-entry_bound, entry_bound].
    """

    entries: np.ndarray
    entry_bound: float | None = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.size == 0:
            raise ShapeError(f"entries must be a nonempty 2-d matrix, got shape {e.shape}")
        object.__setattr__(self, "entries", _readonly(e))
        if self.entry_bound is not None:
            if not self.entry_bound > 1.0:
                raise ShapeError("entry_bound must exceed 1")
            if np.abs(e).max() > self.entry_bound:
                raise ShapeError("entries exceed the declared entry_bound")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def row_sup_sum(self) -> float:
        """Largest L1 norm over rows; bounds |Theta x|_sup by row_sup_sum * |x|_sup."""
        return float(np.abs(self.entries).sum(axis=1).max())


@dataclass(frozen=True)
class GraphForm:
    """A subspace written as {z : z[dep] = theta @ z[free]} over chosen coordinates.

    kappas[i] = sqrt(1 + |theta_i|_2^2) converts a distance bound b into the sound
    per-row residual radius b * kappas[i]: |z[dep_i] - (theta z[free])_i| is at most
    kappas[i] times the Euclidean distance from z to the subspace.
    """

    free: tuple[int, ...]
    dep: tuple[int, ...]
    theta: FormMatrix
    kappas: np.ndarray

    def assemble(self, x_free: np.ndarray, y_dep: np.ndarray) -> np.ndarray:
        """Interleave free and dependent columns back into ambient coordinate order."""
        n = x_free.shape[0]
        d = len(self.free) + len(self.dep)
        z = np.empty((n, d), dtype=x_free.dtype)
        z[:, list(self.free)] = x_free
        z[:, list(self.dep)] = y_dep
        return z


def orthonormal_subspace(vectors, label: str = "") -> Subspace:
    """Orthonormalize spanning vectors (rows or a d x k column matrix) into a Subspace.

    Uses column-pivoted QR; rank is decided at RANK_RTOL times the largest
    column norm. Raises RankDeficient on dependent input, DimensionError when
    the span is not a proper subspace.
    """
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-d array of spanning vectors, got shape {arr.shape}")
    # Accept either rows-as-vectors (k x d) or columns-as-vectors (d x k); rows
    # are the common call shape so transpose when the first axis is the count.
    if arr.shape[0] <= arr.shape[1]:
        cols = arr.T
    else:
        cols = arr
    d, k = cols.shape
    if k >= d:
        raise DimensionError(f"{k} independent vectors cannot span a proper subspace of R^{d}")
    if k == 0:
        raise DimensionError("need at least one spanning vector")
    col_norms = np.linalg.norm(cols, axis=0)
    if col_norms.max() == 0.0:
        raise RankDeficient("all spanning vectors are zero")
    q, r, _ = scipy.linalg.qr(cols, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int((diag > RANK_RTOL * col_norms.max()).sum())
    if rank < k:
        raise RankDeficient(f"spanning vectors have rank {rank} < {k} at tolerance {RANK_RTOL:g}")
    # Deterministic sign convention: largest-magnitude entry of each basis
    # column is positive.
    q = q[:, :k].copy()
    for j in range(k):
        i = int(np.argmax(np.abs(q[:, j])))
        if q[i, j] < 0:
            q[:, j] = -q[:, j]
    return Subspace(q, label=label)


def distance_to_subspace(z, space: Subspace) -> float:
    """Euclidean distance from z to the subspace (raw, no zero snapping)."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (space.ambient_dim,):
        raise ShapeError(f"point has shape {z.shape}, ambient dim is {space.ambient_dim}")
    return float(np.linalg.norm(z - space.projector @ z))


def distances_to_subspace(points: np.ndarray, space: Subspace) -> np.ndarray:
    """Row-wise distance_to_subspace for an (n, d) float or int array."""
    pts = np.asarray(points, dtype=np.float64)
    resid = pts - pts @ space.projector
    return np.sqrt(np.einsum("ij,ij->i", resid, resid))


def graph_subspace(theta: FormMatrix, ambient) -> Subspace:
    """Subspace {(x, y) : y = theta x} inside R^d or inside an ambient Subspace.

    With integer `ambient` = d the graph lives on the first `cols` coordinates of
    R^d (requires rows + cols = d). With a Subspace ambient of dimension a, theta
    must be (a - c) x c and the graph is expressed in the ambient's basis, so the
    result is a c-dimensional subspace of the same R^d containing ambient.
    """
    if not isinstance(theta, FormMatrix):
        theta = FormMatrix(np.asarray(theta, dtype=np.float64))
    n, m = theta.rows, theta.cols
    stack = np.vstack([np.eye(m), theta.entries])  # (m + n) x m, columns span the graph
    if isinstance(ambient, Subspace):
        if n + m != ambient.dim:
            raise ShapeError(
                f"theta is {n}x{m} but ambient subspace has dim {ambient.dim}; need rows+cols=dim"
            )
        cols = ambient.basis @ stack
        label = f"graph {n}x{m} in {ambient.label}"
    else:
        d = int(ambient)
        if n + m != d:
            raise ShapeError(f"theta is {n}x{m} but ambient dim is {d}; need rows+cols=d")
        cols = stack
        label = f"graph {n}x{m} in R^{d}"
    return orthonormal_subspace(cols.T, label=label)


def select_graph_coordinates(space: Subspace) -> GraphForm:
    """Write the subspace as a graph over its best-conditioned coordinate set.

    Chooses the index set I (|I| = dim) maximizing the smallest singular value of
    the dim x dim restriction basis[I, :]; ties resolve to the lexicographically
    smallest set. The dependent block is theta = basis[J, :] @ inv(basis[I, :]).
    """
    d, k = space.ambient_dim, space.dim
    best_sets: tuple[int, ...] | None = None
    best_sigma = -1.0
    for combo in itertools.combinations(range(d), k):
        sigma = np.linalg.svd(space.basis[list(combo), :], compute_uv=False)[-1]
        if sigma > best_sigma + 1e-15:
            best_sigma = float(sigma)
            best_sets = combo
    if best_sets is None or best_sigma <= 0.0:
        raise RankDeficient("no coordinate restriction of full rank")
    free = best_sets
    dep = tuple(i for i in range(d) if i not in free)
    restrict = space.basis[list(free), :]
    theta_entries = space.basis[list(dep), :] @ np.linalg.inv(restrict)
    theta = FormMatrix(theta_entries)
    kappas = np.sqrt(1.0 + np.einsum("ij,ij->i", theta_entries, theta_entries))
    return GraphForm(free=free, dep=dep, theta=theta, kappas=_readonly(kappas))


def principal_angles(s1: Subspace, s2: Subspace) -> np.ndarray:
    """Principal angles between two subspaces of the same ambient space."""
    if s1.ambient_dim != s2.ambient_dim:
        raise ShapeError("subspaces live in different ambient spaces")
    return scipy.linalg.subspace_angles(s1.basis, s2.basis)
