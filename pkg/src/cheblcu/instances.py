"""Seeded random inputs for tests and verification suites."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError
from .hermitian import SparseHermitian


def random_sparse_hermitian(
    rng: np.random.Generator,
    N: int,
    d: int,
    norm: float | tuple[float, float] = (0.5, 0.95),
    complex_entries: bool = True,
) -> SparseHermitian:
    """Random Hermitian matrix with at most ``d`` nonzeros per row.

    Entries are placed symmetrically: each row draws partners among columns
    that still have room, then the matrix is rescaled to spectral norm
    ``norm`` (drawn uniformly when a range is given).  The declared sparsity
    is ``d``, so rows may be padded by the column oracle.
    """
    if not 1 <= d <= N:
        raise DomainError(f"need 1 <= d <= N, got d = {d}, N = {N}")
    M = np.zeros((N, N), dtype=complex)
    count = np.zeros(N, dtype=int)
    for j in range(N):
        if count[j] < d and rng.random() < 0.7:
            M[j, j] = rng.normal()
            count[j] += 1
        free = [k for k in range(j + 1, N) if count[k] < d]
        room = d - count[j]
        if room <= 0 or not free:
            continue
        picks = rng.choice(free, size=min(room, len(free), int(rng.integers(1, room + 1))), replace=False)
        for k in sorted(int(p) for p in picks):
            z = rng.normal() + (1j * rng.normal() if complex_entries else 0.0)
            M[j, k] = z
            M[k, j] = np.conj(z)
            count[j] += 1
            count[k] += 1
    if not np.any(M):
        M[0, 0] = 1.0
    target = rng.uniform(*norm) if isinstance(norm, tuple) else float(norm)
    M *= target / np.linalg.norm(M, 2)
    return SparseHermitian.from_dense(M, sparsity=d)


def random_unitary(rng: np.random.Generator, n: int) -> NDArray[np.complex128]:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, n: int) -> NDArray[np.complex128]:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def uniform_state(n: int) -> NDArray[np.complex128]:
    return np.full(n, 1.0 / np.sqrt(n), dtype=complex)
