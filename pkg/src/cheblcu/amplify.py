"""Standard amplitude amplification over the LCU success subspace.

Registers are ordered ancilla (x) system, flat index ``a * n + s``; the
success flag is ancilla value 0.

The reflection about the initial state is
R_i = W (1 (x) P) (1 - 2|0,0><0,0|) (1 (x) P)^+ W^+, i.e. the inner reflection
acts on the all-zero state of *both* registers.  Using the flag reflection
R_t there instead would reflect about the whole image W(|0> (x) C^n), which
is not two-dimensional Grover dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .walk import complete_unitary

# 2r+1 <= pi / (2 theta) <= (pi/2) / sqrt(p) because arcsin(x) >= x
REPETITION_CONSTANT = math.pi / 2
_ROUND_SNAP = 1e-9


def grover_angle(p: float) -> float:
    if not 0.0 < p <= 1.0:
        raise DomainError(f"success probability must lie in (0, 1], got {p!r}")
    return math.asin(math.sqrt(p))


def optimal_rounds(p: float) -> int:
    """floor(pi/(4 theta) - 1/2) with theta = arcsin sqrt(p): largest round count that does not overshoot."""
    theta = grover_angle(p)
    return max(0, math.floor(math.pi / (4.0 * theta) - 0.5 + _ROUND_SNAP))


def amplified_probability(p: float, rounds: int) -> float:
    return math.sin((2 * rounds + 1) * grover_angle(p)) ** 2


@dataclass(frozen=True)
class AmplificationRun:
    initial_probability: float
    rounds: int
    amplified_probability: float
    predicted_probability: float
    repetitions: int
    repetition_bound: float
    repetition_constant: float = REPETITION_CONSTANT
    initial_state: NDArray[np.complex128] | None = field(default=None, repr=False)
    amplified_state: NDArray[np.complex128] | None = field(default=None, repr=False)

    @property
    def residual_failure(self) -> float:
        return 1.0 - self.amplified_probability

    @property
    def within_repetition_bound(self) -> bool:
        return self.repetitions <= self.repetition_bound * (1 + 1e-12)


def amplify(p: float, rounds: int | None = None) -> AmplificationRun:
    """Closed-form amplification for a known success probability.

    Each round uses W and W^+ once; with the initial application the
    circuit runs W (and the state preparation) 2r + 1 times.  That count is
    checked against c / sqrt(p) = c gamma / ||f(A) psi||.
    """
    if p == 0.0:
        raise DomainError("cannot amplify a zero success probability")
    r = optimal_rounds(p) if rounds is None else int(rounds)
    if r < 0:
        raise DomainError("round count must be nonnegative")
    predicted = amplified_probability(p, r)
    return AmplificationRun(
        initial_probability=p,
        rounds=r,
        amplified_probability=predicted,
        predicted_probability=predicted,
        repetitions=2 * r + 1,
        repetition_bound=REPETITION_CONSTANT / math.sqrt(p),
    )


def _check_dims(W: NDArray, prep: NDArray, ancilla_dim: int) -> int:
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DomainError("W must be a square matrix")
    if prep.ndim != 2 or prep.shape[0] != prep.shape[1]:
        raise DomainError("state preparation must be a square matrix")
    n = prep.shape[0]
    if ancilla_dim * n != W.shape[0]:
        raise DomainError(
            f"dimension mismatch: W is {W.shape[0]}, ancilla {ancilla_dim} x system {n}"
        )
    return n


def reflections(
    W_total: ArrayLike, state_prep: ArrayLike, ancilla_dim: int
) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """(R_t, R_i): reflection about the success flag and about the initial state."""
    W = np.asarray(W_total, dtype=complex)
    P = np.asarray(state_prep, dtype=complex)
    n = _check_dims(W, P, ancilla_dim)
    dim = W.shape[0]
    R_t = np.eye(dim, dtype=complex)
    R_t[np.arange(n), np.arange(n)] = -1.0
    R_0 = np.eye(dim, dtype=complex)
    R_0[0, 0] = -1.0
    prep_full = np.kron(np.eye(ancilla_dim), P)
    outer = W @ prep_full
    R_i = outer @ R_0 @ outer.conj().T
    return R_t, R_i


def grover_iterate(W_total: ArrayLike, state_prep: ArrayLike, ancilla_dim: int) -> NDArray[np.complex128]:
    R_t, R_i = reflections(W_total, state_prep, ancilla_dim)
    return -R_i @ R_t


def state_preparation(psi: ArrayLike, rng: np.random.Generator | None = None) -> NDArray[np.complex128]:
    """Unitary P with P|0> = psi."""
    return complete_unitary(np.asarray(psi, dtype=complex), rng)


def amplify_explicit(
    W_total: ArrayLike,
    state_prep: ArrayLike,
    ancilla_dim: int,
    rounds: int | None = None,
) -> AmplificationRun:
    """Apply G^r to W(1 (x) P)|0,0> and post-select on the flag."""
    W = np.asarray(W_total, dtype=complex)
    P = np.asarray(state_prep, dtype=complex)
    n = _check_dims(W, P, ancilla_dim)
    start = np.zeros(W.shape[0], dtype=complex)
    start[:n] = P[:, 0]
    initial = W @ start
    good0 = initial[:n]
    p = float(np.vdot(good0, good0).real)
    if p == 0.0:
        raise DomainError("initial state has no overlap with the success subspace")
    r = optimal_rounds(p) if rounds is None else int(rounds)
    G = grover_iterate(W, P, ancilla_dim)
    state = initial
    for _ in range(r):
        state = G @ state
    good = state[:n]
    q = float(np.vdot(good, good).real)
    return AmplificationRun(
        initial_probability=p,
        rounds=r,
        amplified_probability=q,
        predicted_probability=amplified_probability(p, r),
        repetitions=2 * r + 1,
        repetition_bound=REPETITION_CONSTANT / math.sqrt(p),
        initial_state=good0 / math.sqrt(p),
        amplified_state=good / math.sqrt(q) if q > 0 else None,
    )
