"""Seeded invariant suites driven by ``cheblcu verify``.

Every check is reported with its measured value, tolerance and slack
(tolerance minus value for upper bounds, value minus bound for lower bounds).
Each suite draws from its own generator ``default_rng([seed, suite_id])``, so
``all`` is exactly the concatenation of the individual suites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .amplify import amplify, amplify_explicit, grover_angle, grover_iterate, reflections, state_preparation
from .chebyshev import (
    TaylorSpec,
    eval_T,
    monomial_cheb_coeffs,
    rescaled_cheb_coeffs,
    taylor_to_cheb,
)
from .errors import DomainError
from .functions import builtin, exp_repeated
from .hermitian import SparseHermitian, exact_matrix_function
from .instances import random_sparse_hermitian, random_state, random_unitary
from .lcu import build_lcu_circuit, check_agreement, run_lcu_full, run_lcu_operator, two_unitary_lcu
from .walk import build_walk, chebyshev_states, walk_block

WALK_SHAPES = ((2, 1), (2, 2), (4, 1), (4, 2), (4, 3), (8, 1), (8, 2), (8, 3))
WALK_DEGREES = 12


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    lower: bool = False

    @property
    def slack(self) -> float:
        return self.value - self.tolerance if self.lower else self.tolerance - self.value

    @property
    def passed(self) -> bool:
        return bool(self.slack >= 0)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "kind": "lower_bound" if self.lower else "upper_bound",
            "value": self.value,
            "tolerance": self.tolerance,
            "slack": self.slack,
            "passed": self.passed,
        }


def _unit_grid(n: int = 201) -> np.ndarray:
    return np.linspace(-1.0, 1.0, n)


def _recurrence_T(n_max: int, x: np.ndarray) -> np.ndarray:
    out = np.empty((n_max + 1, x.size))
    out[0] = 1.0
    out[1] = x
    for n in range(2, n_max + 1):
        out[n] = 2 * x * out[n - 1] - out[n - 2]
    return out


def cheb_suite(rng: np.random.Generator) -> list[Check]:
    s = "cheb"
    sums = [abs(monomial_cheb_coeffs(k).sum() - 1.0) for k in range(65)]
    parity = sum(int(np.count_nonzero(monomial_cheb_coeffs(k)[(k + 1) % 2 :: 2])) for k in range(65))
    x = _unit_grid()
    rec = _recurrence_T(64, x)
    t_err = max(float(np.max(np.abs(eval_T(n, x) - rec[n]))) for n in range(65))

    checks = [
        Check(s, "coefficient_sum_k<=64", max(sums), 1e-12),
        Check(s, "parity_zeros_nonzero_count", float(parity), 0.0),
        Check(s, "T_n_vs_recurrence_n<=64", t_err, 1e-12),
    ]
    exp = builtin("exp")
    for eps in (1e-3, 1e-6, 1e-9):
        t = exp.taylor(eps)
        err = float(np.max(np.abs(t(x) - np.exp(x))))
        checks.append(Check(s, f"exp_truncation_eps={eps:g}", err, eps))

    for trial in range(5):
        L = int(rng.integers(2, 16))
        alpha = rng.normal(size=L)
        spec = TaylorSpec(tuple(alpha))
        beta = taylor_to_cheb(spec)
        checks.append(Check(s, f"beta_weight_le_alpha_weight[{trial}]", beta.weight, spec.weight * (1 + 1e-12)))
        d = int(rng.integers(1, 4))
        gamma = rescaled_cheb_coeffs(spec, d)
        xs = x * d
        err = float(np.max(np.abs(gamma(xs) - spec(xs)))) / gamma.weight
        checks.append(Check(s, f"rescaled_series_matches_taylor[{trial}]", err, 1e-13))
    return checks


def walk_suite(rng: np.random.Generator, instances: int = 16) -> list[Check]:
    s = "walk"
    block_err = backend_err = iso_err = unit_err = 0.0
    for i in range(instances):
        N, d = WALK_SHAPES[i % len(WALK_SHAPES)]
        A = random_sparse_hermitian(rng, N, d)
        op = build_walk(A)
        T = op.isometry
        iso_err = max(iso_err, float(np.linalg.norm(T.conj().T @ T - np.eye(N), 2)))
        Wm = op.matrix
        unit_err = max(unit_err, float(np.linalg.norm(Wm.conj().T @ Wm - np.eye(Wm.shape[0]), 2)))
        blk = walk_block(A)
        H = A.to_dense() / d
        for n in range(WALK_DEGREES + 1):
            ref = exact_matrix_function(SparseHermitian.from_dense(H), lambda y, n=n: eval_T(n, y))
            block_err = max(block_err, float(np.max(np.abs(blk.power(n)[:N, :N] - ref))))
        eye = np.eye(N, dtype=complex)
        fast = chebyshev_states(A, d, WALK_DEGREES, eye, "block")
        full = chebyshev_states(A, d, WALK_DEGREES, eye, "full")
        backend_err = max(backend_err, float(np.max(np.abs(fast - full))))
    return [
        Check(s, "isometry_defect", iso_err, 1e-12),
        Check(s, "walk_unitarity_defect", unit_err, 1e-10),
        Check(s, "block_power_vs_T_n", block_err, 1e-9),
        Check(s, "backend_equivalence", backend_err, 1e-10),
    ]


def lcu_suite(rng: np.random.Generator) -> list[Check]:
    s = "lcu"
    checks: list[Check] = []
    exp = builtin("exp")
    eps = 1e-6
    for N, d in ((4, 2), (8, 3)):
        A = random_sparse_hermitian(rng, N, d)
        psi = random_state(rng, N)
        plan = exp.plan(eps, 1.0, d)
        out = run_lcu_operator(A, plan, psi)
        tag = f"exp_N={N}_d={d}"
        checks.append(Check(s, f"{tag}_operator_error", out.operator_error, eps))
        checks.append(Check(s, f"{tag}_normalized_distance", out.distance_to_oracle, out.checks["normalized_error"]["bound"] + 1e-12))
        approx = exact_matrix_function(A, plan.approximant) @ psi
        p_ref = (np.linalg.norm(approx) / plan.weight) ** 2
        checks.append(Check(s, f"{tag}_probability_identity", abs(out.success_probability - p_ref), 1e-12))
        checks.append(
            Check(s, f"{tag}_probability_lower_bound", out.success_probability, out.approximant_probability_bound - 1e-12, lower=True)
        )
    for k in (1, 2, 3, 5):
        A = random_sparse_hermitian(rng, 4, 2)
        psi = random_state(rng, 4)
        out = run_lcu_operator(A, builtin("monomial", k).plan(None, 1.0, 2), psi)
        checks.append(Check(s, f"monomial_{k}_distance", out.distance_to_oracle, 1e-10))

    A = random_sparse_hermitian(rng, 4, 2)
    psi = random_state(rng, 4)
    plan = builtin("polynomial", 0.3, -0.2, 0.5, 0.1).plan(None, 1.0, 2)
    ds, dp = check_agreement(run_lcu_operator(A, plan, psi), run_lcu_full(A, plan, psi, rng))
    checks.append(Check(s, "full_vs_operator_state", ds, 1e-9))
    checks.append(Check(s, "full_vs_operator_probability", dp, 1e-10))

    worst = -math.inf
    for _ in range(100):
        a0, a1 = rng.uniform(0.05, 1.0, size=2)
        res = two_unitary_lcu(a0, random_unitary(rng, 2), a1, random_unitary(rng, 2), random_state(rng, 2))
        worst = max(worst, res.failure_probability - res.failure_bound)
    checks.append(Check(s, "two_unitary_failure_excess", worst, 1e-12))

    for d in (2, 3):
        A = random_sparse_hermitian(rng, 4, d, norm=(0.5, 0.95))
        res = exp_repeated(A, d, random_state(rng, 4), d * 1e-8)
        checks.append(Check(s, f"exp_repeated_d={d}_fidelity", res.fidelity, 1 - 1e-6, lower=True))
        checks.append(Check(s, f"exp_repeated_d={d}_product_rule",
                            abs(res.cumulative_probability - float(np.prod(res.stage_probabilities))), 1e-12))
        checks.append(Check(s, f"exp_repeated_d={d}_single_shot_weight",
                            abs(res.single_shot_weight / math.exp(d) - 1.0), 1e-3))
    return checks


def synthetic_amplification_instance(
    rng: np.random.Generator, p: float, n: int = 2
) -> tuple[np.ndarray, np.ndarray]:
    """(W, P) on one ancilla qubit (x) C^n whose initial success probability is exactly p.

    W = (R (x) 1) blockdiag(U0, U1) with a real rotation R whose (0, 0)
    entry is sqrt(p); P is a random state preparation.
    """
    c, s = math.sqrt(p), math.sqrt(1.0 - p)
    R = np.array([[c, -s], [s, c]])
    select = np.zeros((2 * n, 2 * n), dtype=complex)
    select[:n, :n] = random_unitary(rng, n)
    select[n:, n:] = random_unitary(rng, n)
    return np.kron(R, np.eye(n)) @ select, state_preparation(random_state(rng, n), rng)


def _rotation_closure(W, P, ancilla_dim) -> tuple[float, float]:
    """(closure defect, rotation angle error) of G on span{Psi_i, good part}."""
    n = P.shape[0]
    start = np.zeros(W.shape[0], dtype=complex)
    start[:n] = P[:, 0]
    psi_i = W @ start
    good = np.zeros_like(psi_i)
    good[:n] = psi_i[:n]
    p = float(np.vdot(good, good).real)
    bad = psi_i - good
    basis = np.stack([good / np.linalg.norm(good), bad / np.linalg.norm(bad)], axis=1)
    G = grover_iterate(W, P, ancilla_dim)
    GB = G @ basis
    inside = basis @ (basis.conj().T @ GB)
    closure = float(np.linalg.norm(GB - inside))
    small = basis.conj().T @ GB
    c, s = math.cos(2 * math.asin(math.sqrt(p))), math.sin(2 * math.asin(math.sqrt(p)))
    return closure, float(np.max(np.abs(small - np.array([[c, s], [-s, c]]))))


def amplify_suite(rng: np.random.Generator) -> list[Check]:
    s = "amplify"
    checks: list[Check] = []
    for p in (0.5, 0.25, 0.05):
        W, P = synthetic_amplification_instance(rng, p)
        run = amplify_explicit(W, P, 2)
        checks.append(Check(s, f"p={p:g}_probability_vs_closed_form",
                            abs(run.amplified_probability - run.predicted_probability), 1e-10))
        checks.append(Check(s, f"p={p:g}_branch_state_unchanged",
                            float(np.linalg.norm(run.amplified_state - run.initial_state)), 1e-9))
        checks.append(Check(s, f"p={p:g}_initial_probability", abs(run.initial_probability - p), 1e-12))
        closure, rot = _rotation_closure(W, P, 2)
        checks.append(Check(s, f"p={p:g}_two_dim_closure", closure, 1e-10))
        checks.append(Check(s, f"p={p:g}_rotation_by_2theta", rot, 1e-10))
        checks.append(Check(s, f"p={p:g}_repetition_bound",
                            float(run.repetitions), run.repetition_bound))

    A = random_sparse_hermitian(rng, 2, 2)
    psi = random_state(rng, 2)
    plan = builtin("monomial", 2).plan(None, 1.0, 2)
    circuit = build_lcu_circuit(A, plan, rng)
    W = circuit.matrix()
    P = state_preparation(psi, rng)
    run = amplify_explicit(W, P, circuit.ancilla_dim)
    ref = run_lcu_operator(A, plan, psi)
    R_t, R_i = reflections(W, P, circuit.ancilla_dim)
    eye = np.eye(W.shape[0])
    checks += [
        Check(s, "lcu_circuit_probability_vs_closed_form",
              abs(run.amplified_probability - run.predicted_probability), 1e-10),
        Check(s, "lcu_circuit_initial_probability", abs(run.initial_probability - ref.success_probability), 1e-10),
        Check(s, "lcu_circuit_branch_state", float(np.linalg.norm(run.amplified_state - ref.state)), 1e-9),
        Check(s, "reflections_involutive", float(max(np.abs(R_t @ R_t - eye).max(), np.abs(R_i @ R_i - eye).max())), 1e-10),
    ]
    # 2r + 1 lies in (pi/(2 theta) - 2, pi/(2 theta)], i.e. Theta(1/sqrt(p)) up to rounding
    gap = max(abs(amplify(p).repetitions - math.pi / (2 * grover_angle(p))) for p in (0.5, 0.05, 0.005))
    checks.append(Check(s, "repetitions_vs_pi_over_2theta", gap, 2.0))
    return checks


SUITES: dict[str, tuple[int, Callable[[np.random.Generator], list[Check]]]] = {
    "cheb": (0, cheb_suite),
    "walk": (1, walk_suite),
    "lcu": (2, lcu_suite),
    "amplify": (3, amplify_suite),
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def run_suite(name: str, seed: int) -> list[Check]:
    if name == "all":
        return [c for n in SUITES for c in run_suite(n, seed)]
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    ident, fn = SUITES[name]
    return fn(np.random.default_rng([seed, ident]))
