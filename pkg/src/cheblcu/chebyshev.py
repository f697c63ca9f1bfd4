"""Scalar Chebyshev machinery.

Evaluation of the first- and second-kind polynomials, the exact expansion of
monomials in the first-kind basis, and conversion of truncated Taylor series
into Chebyshev series whose argument has been rescaled by ``norm_bound * d``.

Coefficient sequences are stored in ascending degree order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as nppoly
from numpy.typing import ArrayLike, NDArray

from .errors import CapabilityError, DomainError

MAX_MONOMIAL_DEGREE = 128
BOUNDARY_TOL = 1e-12
MIN_TRUNCATION_ORDER = 6

# log2(C/eps) values this close to an integer are treated as that integer, so
# rounding in the logarithm of an exact power of two cannot shift L by one.
_LOG_SNAP = 1e-9


@dataclass(frozen=True)
class TaylorSpec:
    """Truncated Maclaurin series of a target function.

    Parameters
    ----------
    coefficients : sequence of float
        alpha_0 .. alpha_{L-1}.
    derivative_bound : float
        Upper bound C on |f^(i)| over the domain, for every i.
    norm_bound : float
        Lambda, an upper bound on the spectral norm of the matrix argument.
    """

    coefficients: tuple[float, ...]
    derivative_bound: float = 1.0
    norm_bound: float = 1.0

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 1:
            raise DomainError("a Taylor series needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise DomainError("Taylor coefficients must be finite")
        if not self.derivative_bound > 0:
            raise DomainError("derivative bound C must be positive")
        if not self.norm_bound > 0:
            raise DomainError("norm bound Lambda must be positive")

    @property
    def order(self) -> int:
        """Number of retained terms L."""
        return len(self.coefficients)

    @property
    def weight(self) -> float:
        """1-norm of the Taylor coefficients."""
        return float(np.sum(np.abs(self.coefficients)))

    def truncated(self, order: int) -> "TaylorSpec":
        if order < 1:
            raise DomainError("truncation order must be >= 1")
        return TaylorSpec(self.coefficients[:order], self.derivative_bound, self.norm_bound)

    def __call__(self, x: ArrayLike) -> NDArray[np.float64] | float:
        out = nppoly.polyval(x, self.coefficients)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ChebyshevSeries:
    """Finite series sum_j c_j T_j(x / scale)."""

    coefficients: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 1:
            raise DomainError("a Chebyshev series needs at least one coefficient")
        if not self.scale > 0:
            raise DomainError("argument scale must be positive")

    @property
    def weight(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    @property
    def degree(self) -> int:
        """Highest degree carrying a nonzero coefficient (0 for the zero series)."""
        nz = np.flatnonzero(self.coefficients)
        return int(nz[-1]) if nz.size else 0

    def __len__(self) -> int:
        return len(self.coefficients)

    def __call__(self, x: ArrayLike) -> NDArray[np.float64] | float:
        return eval_series(self, x)


def _check_degree(n: int) -> None:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"polynomial degree must be a nonnegative integer, got {n!r}")


def _clamp_unit(x: ArrayLike) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) > 1.0 + BOUNDARY_TOL):
        raise DomainError("Chebyshev argument must lie in [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def _scalar_or_array(values: NDArray[np.float64]) -> NDArray[np.float64] | float:
    return float(values) if values.ndim == 0 else values


def eval_T(n: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """First-kind Chebyshev polynomial via T_n(cos t) = cos(n t).

    Uses T_n(-x) = (-1)^n T_n(x) so that arccos is only taken of |x|, which
    keeps the angle accurate close to x = -1.
    """
    _check_degree(n)
    x = _clamp_unit(x)
    sign = np.where((x < 0) & (n % 2 == 1), -1.0, 1.0)
    theta = np.arccos(np.abs(x))
    return _scalar_or_array(sign * np.cos(n * theta))


def eval_U(n: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """Second-kind Chebyshev polynomial via U_n(cos t) = sin((n+1) t) / sin t.

    At x = +-1 the analytic limits (n+1) and (-1)^n (n+1) are returned.
    """
    _check_degree(n)
    x = _clamp_unit(x)
    sign = np.where((x < 0) & (n % 2 == 1), -1.0, 1.0)
    ax = np.abs(x)
    theta = np.arccos(ax)
    at_edge = ax == 1.0
    s = np.where(at_edge, 1.0, np.sin(theta))
    vals = np.where(at_edge, float(n + 1), np.sin((n + 1) * theta) / s)
    return _scalar_or_array(sign * vals)


def monomial_cheb_coeffs(k: int, max_degree: int = MAX_MONOMIAL_DEGREE) -> NDArray[np.float64]:
    """Coefficients C_{k,0..k} with x^k = sum_j C_kj T_j(x).

    C_kj = 2^(1-k) binom(k, (k-j)/2) for j > 0 and k - j even, and
    C_k0 = 2^(-k) binom(k, k/2) for even k.  Binomials come from the
    multiplicative recurrence in floating point; they are exact while they fit
    in 53 bits (k <= ~56) and carry relative error ~k*2^-53 beyond that.
    """
    _check_degree(k)
    if k > max_degree:
        raise CapabilityError(f"monomial degree {k} exceeds the configured maximum {max_degree}")
    out = np.zeros(k + 1)
    binom = 1.0
    for m in range(k // 2 + 1):
        j = k - 2 * m
        out[j] = math.ldexp(binom, 1 - k) if j > 0 else math.ldexp(binom, -k)
        binom = binom * (k - m) / (m + 1)
    return out


def truncation_order(C: float, eps: float) -> int:
    """Number of Taylor terms L: the smallest integer strictly above log2(C/eps), at least 6."""
    if not (0.0 < eps <= 0.5):
        raise DomainError(f"precision eps must lie in (0, 1/2], got {eps!r}")
    if not C > 0:
        raise DomainError(f"derivative bound C must be positive, got {C!r}")
    x = math.log2(C) - math.log2(eps)
    if abs(x - round(x)) < _LOG_SNAP:
        x = float(round(x))
    return max(MIN_TRUNCATION_ORDER, math.floor(x) + 1)


def _convert(alpha: Sequence[float], factor: float) -> NDArray[np.float64]:
    L = len(alpha)
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        powers = factor ** np.arange(L, dtype=float)
        scaled = np.where(alpha == 0.0, 0.0, powers * alpha)
    if not np.all(np.isfinite(scaled)):
        amax = float(np.max(np.abs(alpha)))
        safe = int(math.log(np.finfo(float).max / max(amax, 1.0)) / math.log(factor)) if factor > 1 else L
        raise CapabilityError(
            f"(Lambda*d)^i alpha_i overflows for Lambda*d = {factor}; maximum safe order L = {safe}"
        )
    out = np.zeros(L)
    for i, a in enumerate(scaled):
        if a != 0.0:
            out[: i + 1] += a * monomial_cheb_coeffs(i)
    return out


def taylor_to_cheb(spec: TaylorSpec) -> ChebyshevSeries:
    """beta_j = sum_{i>=j} alpha_i C_ij, a series in T_j(x)."""
    return ChebyshevSeries(tuple(_convert(spec.coefficients, 1.0)), scale=1.0)


def rescaled_cheb_coeffs(spec: TaylorSpec, d: int) -> ChebyshevSeries:
    """gamma_j = sum_{i>=j} (Lambda d)^i alpha_i C_ij, a series in T_j(x / (Lambda d))."""
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise DomainError(f"sparsity d must be a positive integer, got {d!r}")
    factor = spec.norm_bound * d
    return ChebyshevSeries(tuple(_convert(spec.coefficients, factor)), scale=factor)


def eval_series(series: ChebyshevSeries, x: ArrayLike) -> NDArray[np.float64] | float:
    """Evaluate sum_j c_j T_j(x / scale) by Clenshaw's recurrence."""
    t = np.asarray(x, dtype=float) / series.scale
    if np.any(~np.isfinite(t)) or np.any(np.abs(t) > 1.0 + BOUNDARY_TOL):
        raise DomainError("series argument lies outside its scaled domain")
    return _scalar_or_array(np.asarray(npcheb.chebval(t, series.coefficients)))
