"""Quantum walk that realises Chebyshev polynomials T_n(A/d).

The walk lives on C^{2N} (x) C^{2N}; basis state |a, b> has flat index
``a * 2N + b``.  Reading the same flat index as ``anc * N + s`` splits the
space into a 4N-dimensional walk ancilla and the N-dimensional system, with
the system embedded as ancilla value 0.

Two backends produce T_n(A/d) psi:

* ``"full"``  builds the isometry T and the walk W = S(2TT^+ - 1)
  explicitly and returns T^+ W^n T psi;
* ``"block"`` uses the 2N x 2N invariant-subspace block
  [[H, -sqrt(1-H^2)], [sqrt(1-H^2), H]] with H = A/d.

Square roots of complex entries: the upper triangle (j < k) uses the
principal root of conj(A_jk); the lower triangle takes the partner root
A_kj / conj(a_kj) so that conj(a_jk) a_kj = A_jk holds for every pair, the
branch cut on the negative real axis included.  Diagonal entries use
sqrt(|A_jj|) and their sign is carried by the swap, which multiplies |j, j>
by sign(A_jj).  That swap is still a Hermitian involution, so the
block structure of the walk is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import CapabilityError, DomainError, NumericalError
from .hermitian import QueryLedger, SparseHermitian

MAX_WALK_DIM = 16
RANK_TOL = 1e-10
NORM_TOL = 1e-10
ENTRY_TOL = 1e-12

Backend = Literal["block", "full"]


def _resolve_sparsity(A: SparseHermitian, d: int | None) -> SparseHermitian:
    if d is None or d == A.sparsity:
        return A
    return A.with_sparsity(d)


def _slot_amplitude(
    A: SparseHermitian, j: int, k: int, value: complex, ledger: QueryLedger | None
) -> complex:
    if j == k:
        return complex(np.sqrt(abs(value)))
    if j < k:
        return complex(np.sqrt(np.conj(value)))
    # stored A_kj, not conj(A_jk): the two can differ in the sign of a zero
    # imaginary part, which flips the principal root on the negative axis
    upper = A.entry(k, j, ledger)
    partner = np.sqrt(np.conj(upper))
    return complex(upper / np.conj(partner))


def psi_state(
    A: SparseHermitian, d: int | None, j: int, ledger: QueryLedger | None = None
) -> NDArray[np.complex128]:
    """|psi_j> = |j> (x) d^{-1/2} sum_l (sqrt(A_jk^*) |k> + sqrt(1 - |A_jk|) |k + N>), k = col(j, l)."""
    A = _resolve_sparsity(A, d)
    N, d = A.dim, A.sparsity
    if not 0 <= j < N:
        raise DomainError(f"row {j} out of range for dimension {N}")
    phi = np.zeros(2 * N, dtype=complex)
    for slot in range(d):
        k = A.col(j, slot, ledger)
        v = A.entry(j, k, ledger)
        mag = abs(v)
        if mag > 1.0 + ENTRY_TOL:
            raise DomainError(f"|A[{j},{k}]| = {mag} exceeds 1; rescale the matrix first")
        if v != 0:
            phi[k] += _slot_amplitude(A, j, k, v, ledger)
        phi[k + N] += np.sqrt(max(0.0, 1.0 - mag))
    phi /= np.sqrt(d)
    out = np.zeros((2 * N) ** 2, dtype=complex)
    out[j * 2 * N : (j + 1) * 2 * N] = phi
    return out


def isometry(A: SparseHermitian, d: int | None = None, ledger: QueryLedger | None = None) -> NDArray[np.complex128]:
    """T = sum_j |psi_j><j| as a (2N)^2 x N matrix."""
    A = _resolve_sparsity(A, d)
    return np.column_stack([psi_state(A, None, j, ledger) for j in range(A.dim)])


def swap_permutation(N: int) -> NDArray[np.intp]:
    """Index map with (S v)[a*2N + b] = v[b*2N + a]."""
    n2 = 2 * N
    idx = np.arange(n2 * n2)
    return (idx % n2) * n2 + idx // n2


def swap_signs(A: SparseHermitian, ledger: QueryLedger | None = None) -> NDArray[np.float64]:
    N = A.dim
    n2 = 2 * N
    signs = np.ones(n2 * n2)
    for j in range(N):
        if A.entry(j, j, ledger).real < 0:
            signs[j * n2 + j] = -1.0
    return signs


def swap_matrix(A: SparseHermitian) -> NDArray[np.float64]:
    perm = swap_permutation(A.dim)
    return np.eye(perm.size)[perm] * swap_signs(A)[:, None]


@dataclass(frozen=True)
class WalkOperator:
    """The walk W = S(2TT^+ - 1) for a matrix and sparsity."""

    matrix_a: SparseHermitian
    sparsity: int
    isometry: NDArray[np.complex128] = field(repr=False)
    permutation: NDArray[np.intp] = field(repr=False)
    signs: NDArray[np.float64] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.isometry.shape[0]

    def swap(self, v: ArrayLike) -> NDArray[np.complex128]:
        v = np.asarray(v)
        s = self.signs if v.ndim == 1 else self.signs[:, None]
        return v[self.permutation] * s

    def reflect(self, v: ArrayLike) -> NDArray[np.complex128]:
        """(2TT^+ - 1) v."""
        v = np.asarray(v, dtype=complex)
        T = self.isometry
        return 2.0 * (T @ (T.conj().T @ v)) - v

    def apply(self, v: ArrayLike) -> NDArray[np.complex128]:
        return self.swap(self.reflect(v))

    def apply_adjoint(self, v: ArrayLike) -> NDArray[np.complex128]:
        # both factors are Hermitian involutions
        return self.reflect(self.swap(v))

    @property
    def matrix(self) -> NDArray[np.complex128]:
        T = self.isometry
        R = 2.0 * (T @ T.conj().T) - np.eye(self.dim)
        return self.swap(R)


def build_walk(A: SparseHermitian, d: int | None = None, ledger: QueryLedger | None = None) -> WalkOperator:
    A = _resolve_sparsity(A, d)
    if A.dim > MAX_WALK_DIM:
        raise CapabilityError(
            f"explicit walk limited to N <= {MAX_WALK_DIM} (got {A.dim}); use walk_block instead"
        )
    T = isometry(A, None, ledger)
    return WalkOperator(A, A.sparsity, T, swap_permutation(A.dim), swap_signs(A, ledger))


@dataclass(frozen=True)
class WalkBlock:
    """2N x 2N restriction of the walk to span{T|j>, ST|j>}."""

    h: NDArray[np.complex128] = field(repr=False)
    sqrt_term: NDArray[np.complex128] = field(repr=False)

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @property
    def matrix(self) -> NDArray[np.complex128]:
        return np.block([[self.h, -self.sqrt_term], [self.sqrt_term, self.h]])

    def apply(self, x: ArrayLike) -> NDArray[np.complex128]:
        x = np.asarray(x, dtype=complex)
        top, bottom = x[: self.n], x[self.n :]
        return np.concatenate(
            [self.h @ top - self.sqrt_term @ bottom, self.sqrt_term @ top + self.h @ bottom]
        )

    def power(self, n: int) -> NDArray[np.complex128]:
        return np.linalg.matrix_power(self.matrix, n)


def walk_block(A: SparseHermitian, d: int | None = None) -> WalkBlock:
    """Block form [[H, -sqrt(1-H^2)], [sqrt(1-H^2), H]] with H = A/d."""
    A = _resolve_sparsity(A, d)
    H = A.to_dense() / A.sparsity
    lam, vecs = np.linalg.eigh(H)
    if np.max(np.abs(lam)) > 1.0 + NORM_TOL:
        raise DomainError(f"||A/d|| = {np.max(np.abs(lam))} exceeds 1")
    s = np.sqrt(np.clip(1.0 - lam**2, 0.0, None))
    root = (vecs * s) @ vecs.conj().T
    return WalkBlock(H, root)


@dataclass(frozen=True)
class InvariantRestriction:
    block: NDArray[np.complex128]
    basis: NDArray[np.complex128]
    rank: int


def restrict_to_invariant_subspace(op: WalkOperator, tol: float = RANK_TOL) -> InvariantRestriction:
    """Express W in the basis T|j>, (ST - TH)(1 - H^2)^{-1/2}|j>.

    Directions where 1 - H^2 has eigenvalue below ``tol`` (ST|j> inside the
    span of the T|k>) are dropped and show up as ``rank < 2N``.
    """
    T = op.isometry
    ST = op.swap(T)
    H = T.conj().T @ ST
    K = ST - T @ H
    g, q = np.linalg.eigh(K.conj().T @ K)
    keep = g > tol
    inv_sqrt = np.zeros_like(g)
    inv_sqrt[keep] = 1.0 / np.sqrt(g[keep])
    second = K @ ((q * inv_sqrt) @ q.conj().T)
    if not np.all(keep):
        second = K @ (q[:, keep] * inv_sqrt[keep])
    basis = np.hstack([T, second])
    block = basis.conj().T @ op.apply(basis)
    return InvariantRestriction(block, basis, T.shape[1] + int(np.count_nonzero(keep)))


def _as_state_matrix(psi: ArrayLike, N: int) -> tuple[NDArray[np.complex128], bool]:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != N or psi.ndim not in (1, 2):
        raise DomainError(f"state has shape {psi.shape}, expected ({N},) or ({N}, k)")
    return (psi[:, None], True) if psi.ndim == 1 else (psi, False)


def chebyshev_states(
    A: SparseHermitian,
    d: int | None,
    n_max: int,
    psi: ArrayLike,
    backend: Backend = "block",
    ledger: QueryLedger | None = None,
) -> NDArray[np.complex128]:
    """T_n(A/d) psi for n = 0..n_max, stacked along the first axis.

    One pass of ``n_max`` walk steps produces every degree.  ``psi`` may be
    a single vector or an N x k matrix of columns.
    """
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    A = _resolve_sparsity(A, d)
    N = A.dim
    X, squeeze = _as_state_matrix(psi, N)
    out = np.empty((n_max + 1,) + X.shape, dtype=complex)
    if backend == "block":
        blk = walk_block(A)
        state = np.vstack([X, np.zeros_like(X)])
        for n in range(n_max + 1):
            out[n] = state[:N]
            if n < n_max:
                state = blk.apply(state)
    elif backend == "full":
        op = build_walk(A, None, ledger)
        T = op.isometry
        state = T @ X
        for n in range(n_max + 1):
            out[n] = T.conj().T @ state
            if n < n_max:
                state = op.apply(state)
    else:
        raise DomainError(f"unknown backend {backend!r}")
    if ledger is not None:
        ledger.add(steps=n_max)
    return out[:, :, 0] if squeeze else out


def apply_cheb(
    A: SparseHermitian,
    d: int | None,
    n: int,
    psi: ArrayLike,
    backend: Backend = "block",
    ledger: QueryLedger | None = None,
) -> tuple[NDArray[np.complex128], float]:
    """Post-selected T_n(A/d) psi and its success probability ||T_n(A/d) psi||^2."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DomainError("apply_cheb takes a single state vector")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise DomainError("input state must have unit norm")
    result = chebyshev_states(A, d, n, psi, backend, ledger)[n]
    return result, float(np.vdot(result, result).real)


def complete_unitary(
    columns: ArrayLike, rng: np.random.Generator | None = None
) -> NDArray[np.complex128]:
    """Extend orthonormal columns to a unitary whose leading columns are exactly ``columns``.

    With ``rng`` the remaining columns are a random orthonormal basis of the
    complement; without it they come from a QR sweep over the identity.
    """
    cols = np.asarray(columns, dtype=complex)
    if cols.ndim == 1:
        cols = cols[:, None]
    m, k = cols.shape
    gram = cols.conj().T @ cols
    if np.linalg.norm(gram - np.eye(k), 2) > 1e-10:
        raise NumericalError("columns to complete are not orthonormal")
    if rng is None:
        extra = np.eye(m, dtype=complex)
    else:
        extra = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, _ = np.linalg.qr(np.hstack([cols, extra]))
    return np.hstack([cols, q[:, k:m]])


def dilate_isometry(T: ArrayLike, rng: np.random.Generator | None = None) -> NDArray[np.complex128]:
    """Unitary D with D(|0^m>|psi>) = T|psi>, i.e. D[:, :N] = T."""
    return complete_unitary(T, rng)
