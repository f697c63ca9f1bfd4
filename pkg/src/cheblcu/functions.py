"""Built-in target functions and the special-class strategies.

Polynomials are implemented exactly (finite Taylor series, no truncation).
The exponential can be applied directly or as d repetitions of e^{A/d}.
Homogeneous functions relate f(A/d) to f(A) by a known scalar.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as nppoly
from numpy.typing import ArrayLike, NDArray

from .chebyshev import TaylorSpec, truncation_order
from .errors import CapabilityError, DegenerateOutcomeError, DomainError
from .hermitian import SparseHermitian, exact_matrix_function
from .lcu import LcuOutcome, LcuPlan, _check_state, run_lcu_operator


@dataclass(frozen=True)
class FunctionSpec:
    """A target function f with the data needed to build an LCU plan.

    Parameters
    ----------
    name : str
        Label used in reports.
    coefficient : callable or None
        i -> alpha_i, the i-th Maclaurin coefficient.  ``None`` for functions
        that are only used through their evaluator.
    evaluate : callable
        Vectorised pointwise f, the ground truth for verification.
    derivative_bound : callable
        Lambda -> C, a bound on every |f^(i)| over [-Lambda, Lambda].
    degree : int or None
        Polynomial degree, or ``None`` for an infinite series.
    homogeneity : int or None
        k with f(cx) = c^k f(x), when it exists.
    """

    name: str
    coefficient: Callable[[int], float] | None
    evaluate: Callable = field(repr=False)
    derivative_bound: Callable[[float], float] = field(default=lambda lam: 1.0, repr=False)
    degree: int | None = None
    homogeneity: int | None = None

    @property
    def exact(self) -> bool:
        return self.degree is not None

    def order(self, eps: float | None = None, norm_bound: float = 1.0) -> int:
        """Number of Taylor terms needed for sup error <= eps on [-Lambda, Lambda].

        Polynomials need degree + 1 terms whatever eps is.  Otherwise the order
        starts at truncation_order(C, eps) and grows until the Lagrange
        remainder C Lambda^L / L! drops below eps, which only matters for
        Lambda > 1.
        """
        if self.degree is not None:
            return self.degree + 1
        if eps is None:
            raise DomainError(f"function {self.name!r} needs a precision eps")
        C = self.derivative_bound(norm_bound)
        L = truncation_order(C, eps)
        log_eps = math.log(eps)
        while math.log(C) + L * math.log(norm_bound) - math.lgamma(L + 1) > log_eps:
            L += 1
        return L

    def taylor(self, eps: float | None = None, norm_bound: float = 1.0) -> TaylorSpec:
        if self.coefficient is None:
            raise CapabilityError(f"function {self.name!r} has no Taylor series")
        L = self.order(eps, norm_bound)
        coeffs = [self.coefficient(i) for i in range(L)]
        return TaylorSpec(tuple(coeffs), self.derivative_bound(norm_bound), norm_bound)

    def plan(self, eps: float | None, norm_bound: float, sparsity: int) -> LcuPlan:
        return LcuPlan.from_taylor(
            self.taylor(eps, norm_bound),
            sparsity,
            target=self.evaluate,
            exact=self.exact,
            label=self.name,
        )


def _exp_spec() -> FunctionSpec:
    return FunctionSpec(
        name="exp",
        coefficient=lambda i: 1.0 / math.factorial(i),
        evaluate=np.exp,
        derivative_bound=lambda lam: math.exp(lam),
    )


def _exp_neg_spec() -> FunctionSpec:
    return FunctionSpec(
        name="exp_neg",
        coefficient=lambda i: (-1.0) ** i / math.factorial(i),
        evaluate=lambda x: np.exp(-np.asarray(x)),
        derivative_bound=lambda lam: math.exp(lam),
    )


def polynomial_spec(coefficients: ArrayLike, name: str | None = None) -> FunctionSpec:
    """Exact spec for sum_i c_i x^i (ascending order)."""
    c = np.trim_zeros(np.asarray(coefficients, dtype=float), "b")
    if c.size == 0:
        raise DomainError("the zero polynomial cannot be implemented")
    if not np.all(np.isfinite(c)):
        raise DomainError("polynomial coefficients must be finite")
    coeffs = tuple(float(x) for x in c)
    k = len(coeffs) - 1
    nz = np.flatnonzero(c)

    def bound(lam: float) -> float:
        # sup over [-lam, lam] of |f^(m)|, bounded term by term, maximised over m
        r = max(1.0, lam)
        return max(
            max(1.0, sum(abs(coeffs[i]) * math.perm(i, m) * r ** (i - m) for i in range(m, k + 1)))
            for m in range(k + 1)
        )

    return FunctionSpec(
        name=name or "polynomial:" + ",".join(repr(x) for x in coeffs),
        coefficient=lambda i: coeffs[i] if i < len(coeffs) else 0.0,
        evaluate=lambda x: nppoly.polyval(x, coeffs),
        derivative_bound=bound,
        degree=k,
        homogeneity=int(nz[0]) if nz.size == 1 else None,
    )


def monomial_spec(k: int) -> FunctionSpec:
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise DomainError(f"monomial degree must be a nonnegative integer, got {k!r}")
    k = int(k)
    return polynomial_spec([0.0] * k + [1.0], name=f"monomial:{k}")


_SIMPLE = {
    "exp": _exp_spec,
    "exp_neg": _exp_neg_spec,
    "identity": lambda: polynomial_spec([0.0, 1.0], name="identity"),
}

BUILTIN_NAMES = ("exp", "exp_neg", "identity", "monomial:k", "polynomial:c0,c1,...")

_PARAM = re.compile(r"^\s*([a-z_]+)\s*(?:[:(]\s*(.*?)\s*\)?)?\s*$")


def builtin(name: str, *params) -> FunctionSpec:
    """Look up a catalog function, e.g. ``builtin("monomial", 3)``."""
    if name in _SIMPLE:
        if params:
            raise DomainError(f"function {name!r} takes no parameters")
        return _SIMPLE[name]()
    if name == "monomial":
        if len(params) != 1:
            raise DomainError("monomial needs exactly one degree parameter")
        return monomial_spec(params[0])
    if name == "polynomial":
        if not params:
            raise DomainError("polynomial needs at least one coefficient")
        return polynomial_spec(params)
    raise DomainError(f"unknown function {name!r}; available: {', '.join(BUILTIN_NAMES)}")


def parse_function(text: str) -> FunctionSpec:
    """Parse ``name``, ``name:p1,p2`` or ``name(p1,p2)``."""
    m = _PARAM.match(text)
    if not m:
        raise DomainError(f"cannot parse function {text!r}")
    name, raw = m.group(1), m.group(2)
    if not raw:
        return builtin(name)
    try:
        if name == "monomial":
            params = [int(raw)]
        else:
            params = [float(p) for p in raw.split(",")]
    except ValueError as exc:
        raise DomainError(f"bad parameters in {text!r}") from exc
    return builtin(name, *params)


def homogeneous_rescale(spec: FunctionSpec | int, d: float) -> float:
    """g(d) = d^k, so that f(A) = d^k f(A/d) for a degree-k homogeneous f."""
    k = spec if isinstance(spec, int) else spec.homogeneity
    if k is None:
        raise DomainError(f"function {spec.name!r} is not homogeneous")
    if d == 0:
        raise DomainError("scale factor must be nonzero")
    return float(d) ** k


# repeated exponential --------------------------------------------------------


@dataclass(frozen=True)
class RepeatedExpResult:
    state: NDArray[np.complex128] = field(repr=False)
    cumulative_probability: float
    stage_probabilities: tuple[float, ...]
    stage_count: int
    stage_order: int
    fidelity: float
    distance: float
    stage_weight: float
    single_shot_weight: float
    weight_ratio: float
    stages: tuple[LcuOutcome, ...] = field(repr=False, default=())


def stage_exp_plan(d: int, eps: float) -> LcuPlan:
    """Plan for e^{x/d} with sparsity d and Lambda = 1.

    Its Taylor coefficients 1/(d^i i!) are multiplied back by d^i in the
    rescaling, so gamma_j equals the unscaled exp coefficients beta_j.
    """
    L = truncation_order(math.e, eps)
    taylor = TaylorSpec(tuple(1.0 / (d**i * math.factorial(i)) for i in range(L)), math.e, 1.0)
    return LcuPlan.from_taylor(taylor, d, target=lambda x: np.exp(np.asarray(x) / d), label=f"exp/{d}")


def exp_repeated(A: SparseHermitian, d: int, psi: ArrayLike, eps: float) -> RepeatedExpResult:
    """Apply e^A as d successive LCU runs of e^{A/d}, renormalising between stages.

    ``eps`` is the total budget; each stage gets eps / d.
    """
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise DomainError(f"stage count d must be a positive integer, got {d!r}")
    if A.norm > 1.0 + 1e-12:
        raise DomainError(f"exp_repeated needs ||A|| <= 1, got {A.norm}")
    psi = _check_state(psi, A.dim)
    plan = stage_exp_plan(d, eps / d)

    state = psi
    stages = []
    for s in range(d):
        try:
            out = run_lcu_operator(A, plan, state)
        except DegenerateOutcomeError as exc:
            raise DegenerateOutcomeError(f"stage {s}: {exc}", norm=exc.norm, stage=s) from exc
        stages.append(out)
        state = out.state

    probs = tuple(o.success_probability for o in stages)
    ref = exact_matrix_function(A, np.exp) @ psi
    ref /= np.linalg.norm(ref)
    single = _exp_spec().plan(eps, 1.0, d)
    return RepeatedExpResult(
        state=state,
        cumulative_probability=float(np.prod(probs)),
        stage_probabilities=probs,
        stage_count=d,
        stage_order=plan.n_terms,
        fidelity=min(1.0, float(abs(np.vdot(ref, state)) ** 2)),
        distance=float(np.linalg.norm(state - ref)),
        stage_weight=plan.weight,
        single_shot_weight=single.weight,
        weight_ratio=single.weight / plan.weight**d,
        stages=tuple(stages),
    )
