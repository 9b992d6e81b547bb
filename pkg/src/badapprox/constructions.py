"""Reference subspaces and seeded random matrices for experiments.

The algebraic power lines span (1, alpha, ..., alpha^(n-1)) for the real root
alpha > 1 of a fixed irreducible monic polynomial per degree; such lines are
the classical badly-approximable subjects with known exponents, the golden
ratio being the degree-2 case.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ShapeError, UnsupportedDegree
from .geometry import FormMatrix, Subspace, orthonormal_subspace

# degree -> coefficients of the defining monic polynomial, highest power first.
_POLYNOMIALS = {
    2: (1.0, -1.0, -1.0),  # x^2 - x - 1
    3: (1.0, 0.0, -1.0, -1.0),  # x^3 - x - 1
    4: (1.0, -1.0, 0.0, 0.0, -1.0),  # x^4 - x^3 - 1
    5: (1.0, 0.0, 0.0, 0.0, -1.0, -1.0),  # x^5 - x - 1
    6: (1.0, 0.0, 0.0, 0.0, 0.0, -1.0, -1.0),  # x^6 - x - 1
}

ROOT_TOL = 1e-14


def _poly_eval(coeffs, x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _real_root(coeffs) -> float:
    """Largest real root in (1, 2), by bisection then Newton polish."""
    lo, hi = 1.0, 2.0
    flo = _poly_eval(coeffs, lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _poly_eval(coeffs, mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    x = 0.5 * (lo + hi)
    deriv = np.polyder(np.array(coeffs))
    for _ in range(60):
        fx = _poly_eval(coeffs, x)
        dfx = _poly_eval(deriv, x)
        step = fx / dfx
        x -= step
        if abs(step) < ROOT_TOL * max(1.0, abs(x)):
            break
    return float(x)


def defining_polynomial(degree: int) -> tuple[float, ...]:
    if degree not in _POLYNOMIALS:
        raise UnsupportedDegree(f"no pinned polynomial for degree {degree} (supported: 2..6)")
    return _POLYNOMIALS[degree]


def power_root(degree: int) -> float:
    """The real root alpha in (1, 2) of the pinned degree polynomial."""
    return _real_root(defining_polynomial(degree))


def algebraic_power_line(degree: int) -> Subspace:
    """Line span{(1, alpha, ..., alpha^(degree-1))} in R^degree."""
    alpha = power_root(degree)
    vec = np.array([alpha**i for i in range(degree)], dtype=np.float64)
    line = orthonormal_subspace(vec[None, :], label=f"power line deg {degree}")
    return line


def golden_line() -> Subspace:
    """span{(1, golden ratio)} in R^2: the canonical badly-approximable line."""
    return Subspace(
        np.array([[1.0], [(1.0 + np.sqrt(5.0)) / 2.0]]) / np.sqrt(1.0 + ((1.0 + np.sqrt(5.0)) / 2.0) ** 2),
        label="golden line",
    )


def rational_subspace(int_vectors, label: str = "") -> Subspace:
    """Subspace spanned by integer vectors.

    Keeps the exact integer span on the result so the scanner can certify
    lattice membership in rational arithmetic (the orthonormalized float
    basis alone cannot).
    """
    arr = np.asarray(int_vectors)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ShapeError("rational_subspace expects integer spanning vectors")
    space = orthonormal_subspace(arr.astype(np.float64), label=label or "rational subspace")
    space.rational = True
    space.int_span = arr.astype(np.int64).copy()
    return space


def sample_theta(rows: int, cols: int, entry_bound: float, seed: int) -> FormMatrix:
    """Matrix with entries i.i.d. uniform on [-entry_bound, entry_bound].

    Counter-based generator (Philox) keyed by the seed: the stream is
    platform-independent, so equal arguments give bitwise-equal matrices
    everywhere, and disjoint seeds give independent samples.
    """
    if rows < 1 or cols < 1:
        raise ShapeError(f"need positive shape, got {rows}x{cols}")
    if not entry_bound > 1.0:
        raise ShapeError(f"entry bound must exceed 1, got {entry_bound}")
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    entries = gen.uniform(-entry_bound, entry_bound, size=(rows, cols))
    return FormMatrix(entries=entries, entry_bound=entry_bound)


class BKind(enum.Enum):
    ALGEBRAIC = "algebraic"
    GOLDEN_EMBEDDED = "golden_embedded"
    RATIONAL = "rational"


@dataclass(frozen=True)
class ExperimentScenario:
    """Nested data (d, a, b, c): B (dim b) inside A (dim a) inside R^d.

    Candidate c-dimensional subspaces of A are sampled as graphs of random
    (a-c) x c matrices over A's coordinates, entries bounded by theta_bound.
    """

    d: int
    a: int
    b: int
    c: int
    kind: BKind
    seed: int
    inner: Subspace = field(repr=False)
    ambient: Subspace = field(repr=False)
    theta_bound: float = 2.0

    def __post_init__(self):
        if not (0 < self.b <= self.a < self.d):
            raise DimensionError(f"need 0 < b <= a < d, got b={self.b}, a={self.a}, d={self.d}")
        if not (1 <= self.c <= self.a - 1):
            raise DimensionError(f"need 1 <= c <= a-1, got c={self.c}, a={self.a}")
        if self.inner.dim != self.b or self.ambient.dim != self.a:
            raise DimensionError("subspace dimensions disagree with (a, b)")
        if not self.theta_bound > 1.0:
            raise ShapeError(f"theta bound must exceed 1, got {self.theta_bound}")
        for j in range(self.inner.dim):
            col = self.inner.basis[:, j]
            if not self.ambient.contains(col, tol=1e-9):
                raise DimensionError("inner subspace is not contained in the ambient one")


def build_scenario(
    d: int, a: int, b: int, c: int, kind: BKind, seed: int, theta_bound: float = 2.0
) -> ExperimentScenario:
    """Construct (B, A) for the requested kind, deterministically from the seed.

    ALGEBRAIC: B is the degree-d power line (requires b = 1), A extends B with
    seeded random unit vectors. GOLDEN_EMBEDDED: B is the golden line on the
    first two coordinates (requires b = 1, d >= 2), same random extension.
    RATIONAL: the completely rational negative control B = span{e_1..e_b},
    A = span{e_1..e_a} = {x_{a+1} = ... = x_d = 0}.
    """
    if not (0 < b <= a < d and 1 <= c <= a - 1):
        raise DimensionError(f"inadmissible dimensions (d,a,b,c)=({d},{a},{b},{c})")
    if kind is BKind.RATIONAL:
        inner = rational_subspace(np.eye(d, dtype=np.int64)[:b], label=f"rational B dim {b}")
        ambient = (
            rational_subspace(np.eye(d, dtype=np.int64)[:a], label=f"rational A dim {a}")
            if a > b
            else inner
        )
        return ExperimentScenario(
            d=d, a=a, b=b, c=c, kind=kind, seed=seed,
            inner=inner, ambient=ambient, theta_bound=theta_bound,
        )
    if kind is BKind.ALGEBRAIC:
        if b != 1:
            raise DimensionError("ALGEBRAIC scenarios pin B to a line (b = 1)")
        inner = algebraic_power_line(d)
    elif kind is BKind.GOLDEN_EMBEDDED:
        if b != 1:
            raise DimensionError("GOLDEN_EMBEDDED scenarios pin B to a line (b = 1)")
        g = (1.0 + np.sqrt(5.0)) / 2.0
        vec = np.zeros(d)
        vec[0], vec[1] = 1.0, g
        inner = orthonormal_subspace(vec[None, :], label=f"golden line in R^{d}")
    else:
        raise ShapeError(f"unknown scenario kind {kind!r}")
    if a == b:
        ambient = inner
    else:
        gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
        cols = [inner.basis[:, j] for j in range(inner.dim)]
        while len(cols) < a:
            v = gen.uniform(-1.0, 1.0, size=d)
            for u in cols:
                v = v - np.dot(v, u) * u
            norm = np.linalg.norm(v)
            if norm < 1e-6:
                continue
            cols.append(v / norm)
        ambient = orthonormal_subspace(np.stack(cols, axis=1).T, label=f"extended A dim {a}")
    return ExperimentScenario(
        d=d, a=a, b=b, c=c, kind=kind, seed=seed,
        inner=inner, ambient=ambient, theta_bound=theta_bound,
    )
