"""Closed-form covering analytics for the power-log decay family.

Everything here is arithmetic on the four dimensions (a, b, c, d) and two
decay functions psi (for the inner subspace B) and phi (for candidates):
the dyadic covering quantities mu_T, M_T, lambda_T, partial sums of the
comparison series lambda_T * phi(T)^(a-c) / T^(a-c), the convergence
classifier for that series, and the exponent bound of the transference
theorem.  No enumeration happens in this module.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDenominator, DimensionError, ShapeError

BOUNDARY_TOL = 1e-12
_GRID = np.geomspace(2.0, 1e9, 1000)


class AssumptionWarning(UserWarning):
    """A soft analytic hypothesis fails; results are still well defined."""


@dataclass(frozen=True)
class DecayFunction:
    """rho * T^(-gamma) * log(max(T, 2))^logpow.

    The log factor is clamped at T = 2 so log 1 = 0 never annihilates or
    blows up the family at small T; asymptotics only matter for large T.
    """

    rho: float
    gamma: float
    logpow: float = 0.0

    def __post_init__(self):
        if not self.rho > 0.0:
            raise ShapeError(f"rho must be positive, got {self.rho}")
        if self.gamma < 0.0:
            raise ShapeError(f"gamma must be nonnegative, got {self.gamma}")
        vals = self(_GRID)
        ratio = vals / _GRID
        if not np.all(np.diff(ratio) < 0.0):
            raise ShapeError("f(T)/T must be strictly decreasing on [2, inf)")
        if self.logpow > 0.0 and np.any(np.diff(vals) > 0.0):
            raise ShapeError("f must be nonincreasing on [2, inf)")

    def __call__(self, T):
        T = np.asarray(T, dtype=np.float64)
        out = self.rho * T**-self.gamma
        if self.logpow != 0.0:
            out = out * np.log(np.maximum(T, 2.0)) ** self.logpow
        return float(out) if out.ndim == 0 else out


def _check_params(params):
    a, b, c, d = (int(x) for x in params)
    if not (0 < b <= a < d):
        raise DimensionError(f"need 0 < b <= a < d, got (a,b,c,d)=({a},{b},{c},{d})")
    if not 1 <= c < d:
        raise DimensionError(f"need 1 <= c < d, got c={c}")
    return a, b, c, d


def mu(T, params, psi, phi):
    """Covering quantity: 0 for T < 1, else (T/psi)^(a-b) * max(1, (phi/psi)^(d-a)).

    Defined for real T (the dyadic sum below evaluates it at T/2^j) and
    vectorized over arrays.
    """
    a, b, _, d = _check_params(params)
    T = np.asarray(T, dtype=np.float64)
    scalar = T.ndim == 0
    T = np.atleast_1d(T)
    out = np.zeros_like(T)
    live = T >= 1.0
    if np.any(live):
        Tl = T[live]
        pv = np.asarray(psi(Tl), dtype=np.float64)
        fv = np.asarray(phi(Tl), dtype=np.float64)
        out[live] = (Tl / pv) ** (a - b) * np.maximum(1.0, (fv / pv) ** (d - a))
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CoverProfile:
    """Arrays of mu_T, M_T, lambda_T and series partial sums for T = 1..T_max."""

    params: tuple
    psi: DecayFunction
    phi: DecayFunction
    T: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)
    term: np.ndarray = field(repr=False)
    partial: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = len(self.T)
        if not (len(self.M) == len(self.lam) == len(self.term) == len(self.partial) == n):
            raise ShapeError("profile arrays must share one length")
        # lambda_T = M_T - M_{T-1} with M_0 = 0, i.e. M telescopes over lambda.
        prev = np.concatenate(([0.0], self.M[:-1]))
        scale = np.maximum(1.0, np.abs(self.M))
        if np.any(np.abs(self.M - prev - self.lam) > 1e-12 * scale):
            raise ShapeError("M and lambda arrays do not telescope")
        if np.any(self.mu < 0.0):
            raise ShapeError("mu must be nonnegative")


def m_profile(T_max: int, params, psi: DecayFunction, phi: DecayFunction, mu_fn=None) -> CoverProfile:
    """Dyadic sums M_T = sum_{j=0}^{[log2 T]} mu(T/2^j), their differences,
    and partial sums of lambda_T * phi(T)^(a-c) / T^(a-c).

    mu_fn is a test hook replacing the covering quantity; it must accept a
    float array.  The soft hypothesis psi(T) <= T^(-b/(d-b)) is checked on
    [2, T_max] and reported as a warning, never an error.
    """
    a, b, c, d = _check_params(params)
    if not 1 <= c <= a - 1:
        raise DimensionError(f"series exponent needs 1 <= c <= a-1, got c={c}, a={a}")
    T_max = int(T_max)
    if T_max < 1:
        raise ShapeError(f"T_max must be >= 1, got {T_max}")
    if mu_fn is None:
        mu_fn = lambda t: mu(t, params, psi, phi)
        grid = np.geomspace(2.0, max(T_max, 2), min(1000, max(T_max, 2)))
        if np.any(np.asarray(psi(grid)) > grid ** (-b / (d - b)) * (1 + 1e-12)):
            warnings.warn(
                f"psi exceeds T^(-{b}/{d - b}) somewhere on [2, {T_max}]; "
                "covering quantities remain defined but lose their meaning",
                AssumptionWarning,
                stacklevel=2,
            )
    Ts = np.arange(1, T_max + 1, dtype=np.float64)
    levels = int(np.floor(np.log2(T_max))) if T_max > 1 else 0
    M = np.zeros(T_max, dtype=np.float64)
    for j in range(levels + 1):
        lo = (1 << j) - 1  # first index with [log2 T] >= j
        M[lo:] += mu_fn(Ts[lo:] / (1 << j))
    lam = np.diff(M, prepend=0.0)
    gain = np.asarray(phi(Ts), dtype=np.float64) ** (a - c) / Ts ** (a - c)
    term = lam * gain
    return CoverProfile(
        params=(a, b, c, d),
        psi=psi,
        phi=phi,
        T=Ts.astype(np.int64),
        mu=np.asarray(mu_fn(Ts), dtype=np.float64),
        M=M,
        lam=lam,
        term=term,
        partial=np.cumsum(term),
    )


def theorem_bound(a: int, b: int, c: int, d: int, omega: float) -> float:
    """Exponent bound forced on almost every c-dimensional candidate.

    Case c < b: (omega*(d-b) + c-b) / (d-c); case c >= b replaces d by a.
    At c = b both reduce to omega.
    """
    a, b, c, d = _check_params((a, b, c, d))
    if c < b:
        if c == d:
            raise DegenerateDenominator("c = d makes the bound denominator vanish")
        return (omega * (d - b) + c - b) / (d - c)
    if c == a:
        raise DegenerateDenominator("c = a makes the bound denominator vanish")
    if c > a:
        raise DimensionError(f"candidate dimension c={c} cannot exceed a={a}")
    return (omega * (a - b) + c - b) / (a - c)


class Classification(enum.Enum):
    CONVERGES = "CONVERGES"
    DIVERGES = "DIVERGES"
    BOUNDARY_CONVERGES = "BOUNDARY_CONVERGES"
    BOUNDARY_DIVERGES = "BOUNDARY_DIVERGES"


def classify_convergence(params, psi: DecayFunction, phi: DecayFunction) -> Classification:
    """Convergence of the comparison series for power-log psi and phi.

    With psi = T^-beta log^B T and phi = T^-gamma log^C T: gamma strictly
    above the threshold (beta*(d-b)+c-b)/(d-c) for c < b, or the same with a
    in place of d for c >= b, gives convergence; strictly below, divergence.
    At the threshold the log powers decide, converging only under the strict
    criterion C*(d-c) - B*(d-b) < -1 (resp. with a).  Gamma within 1e-12 of
    the threshold counts as boundary; the constants rho never matter.
    """
    a, b, c, d = _check_params(params)
    beta, bpow = psi.gamma, psi.logpow
    gamma, cpow = phi.gamma, phi.logpow
    if c < b:
        if c == d:
            raise DegenerateDenominator("c = d makes the threshold denominator vanish")
        threshold = (beta * (d - b) + c - b) / (d - c)
        edge = cpow * (d - c) - bpow * (d - b)
    else:
        if c == a:
            raise DegenerateDenominator("c = a makes the threshold denominator vanish")
        threshold = (beta * (a - b) + c - b) / (a - c)
        edge = cpow * (a - c) - bpow * (a - b)
    if gamma > threshold + BOUNDARY_TOL:
        return Classification.CONVERGES
    if gamma < threshold - BOUNDARY_TOL:
        return Classification.DIVERGES
    return Classification.BOUNDARY_CONVERGES if edge < -1.0 else Classification.BOUNDARY_DIVERGES
