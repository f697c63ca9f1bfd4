"""Linear combination of unitaries built from walk-realised Chebyshev terms.

A plan holds the rescaled series sum_j gamma_j T_j(x / (Lambda d)).  The
matrix is divided by Lambda before the walk is built, so the walk's own
T_j(A'/d) with A' = A / Lambda is exactly the required T_j(A / (Lambda d)).
Signs of gamma_j become a +-1 phase on the matching select branch.

Register order for the explicit circuit is control (x) walk space, with
flat index ``c * (2N)^2 + w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .chebyshev import ChebyshevSeries, TaylorSpec, eval_series, rescaled_cheb_coeffs
from .errors import CapabilityError, DegenerateOutcomeError, DomainError, NumericalError
from .hermitian import QueryLedger, SparseHermitian, apply_pointwise, exact_matrix_function
from .walk import WalkOperator, build_walk, chebyshev_states, complete_unitary, dilate_isometry

UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
DEGENERATE_PROBABILITY = 1e-14
# slack for rounding in the two independently computed normalized states
ROUNDING_FLOOR = 1e-12
MAX_FULL_N = 8
MAX_FULL_TERMS = 8


def _check_state(psi: ArrayLike, N: int | None = None) -> NDArray[np.complex128]:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or (N is not None and psi.shape[0] != N):
        raise DomainError(f"state has shape {psi.shape}, expected ({N},)")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise DomainError("input state must have unit norm")
    return psi


def _check_unitary(U: ArrayLike, name: str) -> NDArray[np.complex128]:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DomainError(f"{name} must be square")
    if np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2) > UNITARY_TOL:
        raise DomainError(f"{name} is not unitary")
    return U


# two-unitary warm-up --------------------------------------------------------


@dataclass(frozen=True)
class TwoUnitaryResult:
    state: NDArray[np.complex128]
    success_probability: float
    failure_probability: float
    failure_bound: float
    register_state: NDArray[np.complex128] = field(repr=False)
    displayed_state: NDArray[np.complex128] = field(repr=False)


def two_unitary_lcu(
    alpha0: float, U0: ArrayLike, alpha1: float, U1: ArrayLike, psi: ArrayLike
) -> TwoUnitaryResult:
    """Simulate (V^+ (x) 1) U (V (x) 1) |0>|psi> for alpha0 U0 + alpha1 U1.

    ``register_state`` is the full ancilla-first two-register vector and
    ``displayed_state`` the closed form
    (|0>(a0 U0 + a1 U1)psi + sqrt(a0 a1)|1>(U1 - U0)psi) / a.
    """
    if not (alpha0 > 0 and alpha1 > 0):
        raise DomainError("LCU weights must be positive")
    U0 = _check_unitary(U0, "U0")
    U1 = _check_unitary(U1, "U1")
    if U0.shape != U1.shape:
        raise DomainError("U0 and U1 differ in shape")
    n = U0.shape[0]
    psi = _check_state(psi, n)
    alpha = alpha0 + alpha1
    V = np.array([[math.sqrt(alpha0), -math.sqrt(alpha1)], [math.sqrt(alpha1), math.sqrt(alpha0)]]) / math.sqrt(alpha)
    select = np.block([[U0, np.zeros_like(U0)], [np.zeros_like(U1), U1]])
    Vfull = np.kron(V, np.eye(n))
    start = np.concatenate([psi, np.zeros(n, dtype=complex)])
    final = Vfull.conj().T @ (select @ (Vfull @ start))

    u0, u1 = U0 @ psi, U1 @ psi
    displayed = np.concatenate([alpha0 * u0 + alpha1 * u1, math.sqrt(alpha0 * alpha1) * (u1 - u0)]) / alpha

    good = final[:n]
    p_success = float(np.vdot(good, good).real)
    p_fail = float(np.vdot(final[n:], final[n:]).real)
    if p_success < DEGENERATE_PROBABILITY:
        raise DegenerateOutcomeError("success branch vanishes", norm=math.sqrt(p_success))
    return TwoUnitaryResult(
        state=good / math.sqrt(p_success),
        success_probability=p_success,
        failure_probability=p_fail,
        failure_bound=4.0 * alpha0 * alpha1 / alpha**2,
        register_state=final,
        displayed_state=displayed,
    )


# plans ----------------------------------------------------------------------


@dataclass(frozen=True)
class LcuPlan:
    """Chebyshev LCU plan sum_j gamma_j T_j(x / (Lambda d)).

    ``target`` is the exact function used as the verification oracle; when
    absent the truncated polynomial itself is the oracle.  ``exact`` marks
    plans whose polynomial is the target (finite Taylor series).
    """

    series: ChebyshevSeries
    norm_bound: float
    sparsity: int
    target: Callable | None = field(default=None, compare=False, repr=False)
    exact: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        if not math.isclose(self.series.scale, self.norm_bound * self.sparsity, rel_tol=1e-15):
            raise DomainError("series scale must equal norm_bound * sparsity")
        if not self.weight > 0:
            raise DomainError("plan weight must be positive")

    @classmethod
    def from_taylor(
        cls,
        taylor: TaylorSpec,
        sparsity: int,
        target: Callable | None = None,
        exact: bool = False,
        label: str = "",
    ) -> "LcuPlan":
        series = rescaled_cheb_coeffs(taylor, sparsity)
        return cls(series, taylor.norm_bound, sparsity, target, exact, label)

    @property
    def coefficients(self) -> NDArray[np.float64]:
        return np.asarray(self.series.coefficients)

    @property
    def magnitudes(self) -> NDArray[np.float64]:
        return np.abs(self.coefficients)

    @property
    def signs(self) -> NDArray[np.float64]:
        return np.where(self.coefficients < 0, -1.0, 1.0)

    @property
    def weight(self) -> float:
        return self.series.weight

    @property
    def n_terms(self) -> int:
        return len(self.series)

    @property
    def control_qubits(self) -> int:
        return max(0, math.ceil(math.log2(self.n_terms))) if self.n_terms > 1 else 0

    @property
    def control_dim(self) -> int:
        return 2**self.control_qubits

    @property
    def scale(self) -> float:
        return self.series.scale

    def approximant(self, x: ArrayLike):
        return eval_series(self.series, x)

    def oracle(self) -> Callable:
        return self.target if self.target is not None else self.approximant


def prepare_control(plan: LcuPlan, rng: np.random.Generator | None = None) -> NDArray[np.complex128]:
    """Unitary V with V|0> = sum_j sqrt(|gamma_j| / gamma) |j>, padded to the control dimension."""
    amps = np.zeros(plan.control_dim, dtype=complex)
    amps[: plan.n_terms] = np.sqrt(plan.magnitudes / plan.weight)
    amps /= np.linalg.norm(amps)
    return complete_unitary(amps, rng)


# outcomes -------------------------------------------------------------------


@dataclass(frozen=True)
class LcuOutcome:
    """Post-selected result of an LCU run together with its verification data.

    ``query_count`` is the literal number of walk steps a naive select
    spends (sum of all branch degrees); ``shared_query_count`` counts only the
    deepest branch, L - 1 steps.
    """

    state: NDArray[np.complex128] = field(repr=False)
    unnormalized: NDArray[np.complex128] = field(repr=False)
    success_probability: float
    fidelity_to_oracle: float
    distance_to_oracle: float
    weight: float
    mu: float
    mu_tilde: float
    predicted_probability_bound: float
    approximant_probability_bound: float
    operator_error: float
    error_bound: float
    query_count: int
    shared_query_count: int
    walk_steps: int
    checks: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values() if c.get("asserted", True))


def _implemented_operator(A: SparseHermitian, plan: LcuPlan) -> NDArray[np.complex128]:
    As = A.scaled(1.0 / plan.norm_bound)
    cols = chebyshev_states(As, plan.sparsity, plan.n_terms - 1, np.eye(A.dim, dtype=complex), "block")
    return np.tensordot(plan.coefficients, cols, axes=1)


def _validate(A: SparseHermitian, plan: LcuPlan) -> None:
    if A.norm > plan.norm_bound * (1 + 1e-12):
        raise DomainError(f"||A|| = {A.norm} exceeds the plan's norm bound {plan.norm_bound}")
    if A.max_row_nnz > plan.sparsity or plan.sparsity > A.dim:
        raise DomainError(
            f"plan sparsity {plan.sparsity} incompatible with matrix (row nnz {A.max_row_nnz}, N {A.dim})"
        )


def normalized_error_bound(min_abs_eigen: float, eps: float) -> float:
    """2 eps / (|lambda_min| - eps): distance between C psi/||C psi|| and D psi/||D psi|| when ||C - D|| <= eps."""
    if not 0 <= eps < 0.5:
        raise DomainError(f"eps must lie in [0, 1/2), got {eps!r}")
    if min_abs_eigen <= eps:
        raise DomainError("bound undefined: smallest |eigenvalue| does not exceed eps")
    return 2.0 * eps / (min_abs_eigen - eps)


def _finish(
    A: SparseHermitian,
    plan: LcuPlan,
    psi: NDArray[np.complex128],
    v: NDArray[np.complex128],
    walk_steps: int,
) -> LcuOutcome:
    gamma = plan.weight
    norm_v = float(np.linalg.norm(v))
    p = (norm_v / gamma) ** 2
    if p < DEGENERATE_PROBABILITY:
        raise DegenerateOutcomeError(f"f(A)psi is numerically zero (||v|| = {norm_v:.3e})", norm=norm_v)
    out = v / norm_v

    f = plan.oracle()
    exact = exact_matrix_function(A, f)
    ref = exact @ psi
    ref_norm = float(np.linalg.norm(ref))
    if ref_norm == 0.0:
        raise DegenerateOutcomeError("oracle f(A)psi vanishes", norm=0.0)
    ref = ref / ref_norm
    overlap = np.vdot(ref, out)
    fidelity = min(1.0, float(abs(overlap) ** 2))
    distance = float(np.linalg.norm(out - ref))

    lam = A.spectral.eigenvalues
    mu = float(np.min(np.abs(apply_pointwise(f, lam))))
    mu_tilde = float(np.min(np.abs(plan.approximant(lam))))
    bound = (mu / gamma) ** 2
    bound_tilde = (mu_tilde / gamma) ** 2

    op_error = float(np.linalg.norm(exact - _implemented_operator(A, plan), 2))
    try:
        err_bound = normalized_error_bound(mu, op_error)
    except DomainError:
        err_bound = math.inf

    L = plan.n_terms
    checks = {
        "probability_bound": {
            "passed": p >= bound_tilde - 1e-12,
            "value": p,
            "bound": bound_tilde,
            "asserted": True,
        },
        "probability_bound_unsquared": {
            "passed": p >= mu / gamma,
            "value": p,
            "bound": mu / gamma,
            "asserted": False,
        },
        "normalized_error": {
            "passed": distance <= err_bound + ROUNDING_FLOOR,
            "value": distance,
            "bound": err_bound,
            "asserted": True,
        },
    }
    return LcuOutcome(
        state=out,
        unnormalized=v,
        success_probability=p,
        fidelity_to_oracle=fidelity,
        distance_to_oracle=distance,
        weight=gamma,
        mu=mu,
        mu_tilde=mu_tilde,
        predicted_probability_bound=bound,
        approximant_probability_bound=bound_tilde,
        operator_error=op_error,
        error_bound=err_bound,
        query_count=L * (L - 1) // 2,
        shared_query_count=L - 1,
        walk_steps=walk_steps,
        checks=checks,
    )


def run_lcu_operator(
    A: SparseHermitian, plan: LcuPlan, psi: ArrayLike, ledger: QueryLedger | None = None
) -> LcuOutcome:
    """Operator-level LCU: v = sum_j gamma_j T_j(A/(Lambda d)) psi via the block backend."""
    _validate(A, plan)
    psi = _check_state(psi, A.dim)
    As = A.scaled(1.0 / plan.norm_bound)
    terms = chebyshev_states(As, plan.sparsity, plan.n_terms - 1, psi, "block", ledger)
    v = np.tensordot(plan.coefficients, terms, axes=1)
    return _finish(A, plan, psi, v, plan.n_terms - 1)


@dataclass(frozen=True)
class LcuCircuit:
    """Explicit unitaries of the Chebyshev LCU for one matrix and plan."""

    plan: LcuPlan
    n: int
    control: NDArray[np.complex128] = field(repr=False)
    dilation: NDArray[np.complex128] = field(repr=False)
    walk: WalkOperator = field(repr=False)

    @property
    def walk_dim(self) -> int:
        return self.dilation.shape[0]

    @property
    def dim(self) -> int:
        return self.plan.control_dim * self.walk_dim

    @property
    def ancilla_dim(self) -> int:
        return self.dim // self.n

    def _branch(self, j: int, x: NDArray[np.complex128]) -> NDArray[np.complex128]:
        if j >= self.plan.n_terms:
            return x
        D = self.dilation
        y = D @ x
        for _ in range(j):
            y = self.walk.apply(y)
        return self.plan.signs[j] * (D.conj().T @ y)

    def apply(self, state: ArrayLike) -> NDArray[np.complex128]:
        """W = (V^+ (x) 1) U (V (x) 1) applied to a flat vector or matrix of columns."""
        C, M = self.plan.control_dim, self.walk_dim
        x = np.asarray(state, dtype=complex)
        cols = x.reshape(C, M, -1)
        cols = np.einsum("ab,bmk->amk", self.control, cols)
        cols = np.stack([self._branch(j, cols[j]) for j in range(C)])
        cols = np.einsum("ab,bmk->amk", self.control.conj().T, cols)
        return cols.reshape(x.shape)

    def matrix(self) -> NDArray[np.complex128]:
        return self.apply(np.eye(self.dim, dtype=complex))

    def embed(self, psi: ArrayLike) -> NDArray[np.complex128]:
        """|0^s>|0^m>|psi> as a flat vector."""
        out = np.zeros(self.dim, dtype=complex)
        out[: self.n] = psi
        return out


def build_lcu_circuit(A: SparseHermitian, plan: LcuPlan, rng: np.random.Generator | None = None) -> LcuCircuit:
    _validate(A, plan)
    if A.dim > MAX_FULL_N or plan.n_terms > MAX_FULL_TERMS:
        raise CapabilityError(
            f"explicit LCU limited to N <= {MAX_FULL_N} and L <= {MAX_FULL_TERMS} "
            f"(got N = {A.dim}, L = {plan.n_terms})"
        )
    As = A.scaled(1.0 / plan.norm_bound)
    walk = build_walk(As, plan.sparsity)
    return LcuCircuit(plan, A.dim, prepare_control(plan, rng), dilate_isometry(walk.isometry, rng), walk)


def run_lcu_full(
    A: SparseHermitian,
    plan: LcuPlan,
    psi: ArrayLike,
    rng: np.random.Generator | None = None,
) -> LcuOutcome:
    """Explicit-circuit LCU, post-selecting control = 0 and the walk ancilla on |0^m>.

    ``rng`` selects a random completion of V and of the dilated isometry;
    the post-selected result does not depend on it.
    """
    psi = _check_state(psi, A.dim)
    circuit = build_lcu_circuit(A, plan, rng)
    final = circuit.apply(circuit.embed(psi))
    v = plan.weight * final[: A.dim]
    L = plan.n_terms
    return _finish(A, plan, psi, v, L * (L - 1) // 2)


def check_agreement(a: LcuOutcome, b: LcuOutcome) -> tuple[float, float]:
    """(state difference, probability difference) between two outcomes."""
    if a.state.shape != b.state.shape:
        raise NumericalError("outcomes have different dimensions")
    return float(np.linalg.norm(a.state - b.state)), abs(a.success_probability - b.success_probability)
