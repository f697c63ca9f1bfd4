"""Sparse Hermitian matrices with oracle-style row access.

Indices are 0-based throughout the Python API.  The matrix file format uses
1-based indices and is translated on load.

The column oracle pads short rows: slot ``l`` of a row with ``nnz < l + 1``
nonzeros returns the ``(l - nnz)``-th smallest column that is *not* a nonzero
of that row.  Slot ``nnz`` therefore gets the smallest absent column, and the
padded slots of one row never repeat a column, which is what the walk states
need to stay normalised.  This requires ``d <= N``.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import CapabilityError, DomainError, NumericalError

MAX_DENSE_DIM = 512
GRID_POINTS = 1001


@dataclass
class QueryLedger:
    """Per-run resource counters.  Increments are lock-protected."""

    entry_queries: int = 0
    col_queries: int = 0
    walk_steps: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, *, entry: int = 0, col: int = 0, steps: int = 0) -> None:
        with self._lock:
            self.entry_queries += entry
            self.col_queries += col
            self.walk_steps += steps

    @property
    def oracle_queries(self) -> int:
        return self.entry_queries + self.col_queries

    def as_dict(self) -> dict[str, int]:
        return {
            "entry_queries": self.entry_queries,
            "col_queries": self.col_queries,
            "walk_steps": self.walk_steps,
        }


class SpectralData(NamedTuple):
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.complex128]


class SpectralStats(NamedTuple):
    norm: float
    mu: float
    f_min: float


class SparseHermitian:
    """A d-sparse Hermitian matrix stored row by row (both triangles).

    Parameters
    ----------
    dim : int
        Matrix dimension N.
    rows : sequence of sequences of (column, value)
        Nonzero entries of each row with strictly increasing columns.
        Explicit zeros are dropped.
    sparsity : int, optional
        Declared sparsity d.  Defaults to the largest row count; a declared
        value must be at least that and at most N.
    """

    def __init__(
        self,
        dim: int,
        rows: Sequence[Sequence[tuple[int, complex]]],
        sparsity: int | None = None,
    ):
        if isinstance(dim, bool) or int(dim) != dim or dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {dim!r}")
        dim = int(dim)
        if len(rows) != dim:
            raise DomainError(f"expected {dim} rows, got {len(rows)}")
        cols: list[tuple[int, ...]] = []
        vals: list[tuple[complex, ...]] = []
        for j, row in enumerate(rows):
            rc, rv = [], []
            last = -1
            for k, v in row:
                k = int(k)
                v = complex(v)
                if not 0 <= k < dim:
                    raise DomainError(f"column {k} out of range in row {j}")
                if k <= last:
                    raise DomainError(f"columns of row {j} must be strictly increasing")
                if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                    raise DomainError(f"entry ({j}, {k}) is not finite")
                last = k
                if v != 0:
                    rc.append(k)
                    rv.append(v)
            cols.append(tuple(rc))
            vals.append(tuple(rv))
        self._dim = dim
        self._cols = tuple(cols)
        self._vals = tuple(vals)
        self._lookup = [dict(zip(c, v)) for c, v in zip(cols, vals)]
        self._check_hermitian()

        max_nnz = max(len(c) for c in cols)
        if sparsity is None:
            sparsity = max(max_nnz, 1)
        if isinstance(sparsity, bool) or int(sparsity) != sparsity:
            raise DomainError(f"sparsity must be an integer, got {sparsity!r}")
        sparsity = int(sparsity)
        if sparsity < max(max_nnz, 1):
            raise DomainError(f"declared sparsity {sparsity} is below the largest row count {max_nnz}")
        if sparsity > dim:
            raise DomainError(f"sparsity {sparsity} exceeds the dimension {dim}")
        self._d = sparsity

    def _check_hermitian(self) -> None:
        for j, row in enumerate(self._lookup):
            for k, v in row.items():
                if j == k:
                    if v.imag != 0.0:
                        raise DomainError(f"diagonal entry ({j}, {j}) is not real")
                    continue
                w = self._lookup[k].get(j)
                if w is None or w != v.conjugate():
                    raise DomainError(f"entries ({j}, {k}) and ({k}, {j}) are not conjugate")

    # construction helpers -------------------------------------------------

    @classmethod
    def from_dense(cls, matrix: ArrayLike, sparsity: int | None = None) -> "SparseHermitian":
        """Build from a dense array; exact zeros are treated as absent."""
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("matrix must be square")
        rows = [[(k, m[j, k]) for k in np.flatnonzero(m[j])] for j in range(m.shape[0])]
        return cls(m.shape[0], rows, sparsity)

    @classmethod
    def from_entries(
        cls,
        dim: int,
        entries: Iterable[tuple[int, int, complex]],
        sparsity: int | None = None,
    ) -> "SparseHermitian":
        """Build from (row, col, value) triples, 0-based.

        The mirrored entry is filled in by conjugation.  Repeating a position
        is rejected; giving both (j, k) and (k, j) is accepted only if they are
        exact conjugates.
        """
        given: dict[tuple[int, int], complex] = {}
        for j, k, v in entries:
            j, k = int(j), int(k)
            if not (0 <= j < dim and 0 <= k < dim):
                raise DomainError(f"entry ({j}, {k}) out of range for dimension {dim}")
            if (j, k) in given:
                raise DomainError(f"duplicate entry at ({j}, {k})")
            given[(j, k)] = complex(v)
        full = dict(given)
        for (j, k), v in given.items():
            mirrored = v.conjugate()
            if (k, j) in given:
                if given[(k, j)] != mirrored:
                    raise DomainError(f"entries ({j}, {k}) and ({k}, {j}) are not conjugate")
            else:
                full[(k, j)] = mirrored
        rows: list[list[tuple[int, complex]]] = [[] for _ in range(dim)]
        for (j, k), v in sorted(full.items()):
            rows[j].append((k, v))
        return cls(dim, rows, sparsity)

    def with_sparsity(self, d: int) -> "SparseHermitian":
        return SparseHermitian(self._dim, self.rows(), d)

    def scaled(self, factor: float) -> "SparseHermitian":
        """Return factor * A (factor real, so Hermiticity is preserved exactly)."""
        factor = float(factor)
        rows = [[(k, v * factor) for k, v in zip(c, vs)] for c, vs in zip(self._cols, self._vals)]
        return SparseHermitian(self._dim, rows, self._d)

    # accessors ------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def sparsity(self) -> int:
        return self._d

    @property
    def max_row_nnz(self) -> int:
        return max(len(c) for c in self._cols)

    def rows(self) -> list[list[tuple[int, complex]]]:
        return [list(zip(c, v)) for c, v in zip(self._cols, self._vals)]

    def row_columns(self, j: int) -> tuple[int, ...]:
        return self._cols[j]

    def entry(self, j: int, k: int, ledger: QueryLedger | None = None) -> complex:
        """A_jk (0 when absent)."""
        if not (0 <= j < self._dim and 0 <= k < self._dim):
            raise DomainError(f"index ({j}, {k}) out of range for dimension {self._dim}")
        if ledger is not None:
            ledger.add(entry=1)
        return self._lookup[j].get(k, 0j)

    def col(self, j: int, l: int, ledger: QueryLedger | None = None) -> int:
        """Column of the l-th nonzero of row j, padded as described in the module docstring."""
        if not 0 <= j < self._dim:
            raise DomainError(f"row {j} out of range for dimension {self._dim}")
        if not 0 <= l < self._d:
            raise DomainError(f"slot {l} out of range for sparsity {self._d}")
        if ledger is not None:
            ledger.add(col=1)
        cols = self._cols[j]
        if l < len(cols):
            return cols[l]
        skip = l - len(cols)
        present = set(cols)
        for c in range(self._dim):
            if c not in present:
                if skip == 0:
                    return c
                skip -= 1
        raise AssertionError("unreachable: d <= N guarantees enough absent columns")

    def to_dense(self) -> NDArray[np.complex128]:
        m = np.zeros((self._dim, self._dim), dtype=complex)
        for j, (c, v) in enumerate(zip(self._cols, self._vals)):
            if c:
                m[j, list(c)] = v
        return m

    @cached_property
    def spectral(self) -> SpectralData:
        return spectral_decomposition(self)

    @property
    def norm(self) -> float:
        """Spectral norm max |lambda_j|."""
        return float(np.max(np.abs(self.spectral.eigenvalues)))

    def fingerprint(self) -> str:
        """sha256 over a canonical rendering of (N, d, entries)."""
        h = hashlib.sha256()
        h.update(f"{self._dim}:{self._d};".encode())
        for j, (c, v) in enumerate(zip(self._cols, self._vals)):
            for k, x in zip(c, v):
                h.update(f"{j},{k},{x.real!r},{x.imag!r};".encode())
        return h.hexdigest()

    def __repr__(self) -> str:
        nnz = sum(len(c) for c in self._cols)
        return f"SparseHermitian(dim={self._dim}, sparsity={self._d}, nnz={nnz})"


# oracle-style free functions ------------------------------------------------


def oracle_entry(A: SparseHermitian, j: int, k: int, ledger: QueryLedger | None = None) -> complex:
    return A.entry(j, k, ledger)


def oracle_col(A: SparseHermitian, j: int, l: int, ledger: QueryLedger | None = None) -> int:
    return A.col(j, l, ledger)


def spectral_decomposition(A: SparseHermitian) -> SpectralData:
    if A.dim > MAX_DENSE_DIM:
        raise CapabilityError(f"dense eigendecomposition limited to N <= {MAX_DENSE_DIM}")
    m = A.to_dense()
    try:
        lam, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    residual = float(np.linalg.norm((vecs * lam) @ vecs.conj().T - m, 2))
    unitarity = float(np.linalg.norm(vecs.conj().T @ vecs - np.eye(A.dim), 2))
    if residual > 1e-10 * A.dim or unitarity > 1e-10:
        raise NumericalError(
            f"eigendecomposition inaccurate: reconstruction residual {residual:.3e}, "
            f"unitarity defect {unitarity:.3e}"
        )
    return SpectralData(lam, vecs)


def apply_pointwise(f: Callable, x: NDArray[np.float64]) -> NDArray:
    try:
        out = np.asarray(f(x))
        if out.shape == x.shape:
            return out
    except Exception:
        pass
    return np.array([f(float(v)) for v in x])


def exact_matrix_function(A: SparseHermitian, f: Callable) -> NDArray[np.complex128]:
    """sum_j f(lambda_j) |u_j><u_j| from a dense eigendecomposition."""
    lam, vecs = A.spectral
    vals = apply_pointwise(f, lam)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("function is not finite on the spectrum")
    return (vecs * vals) @ vecs.conj().T


def spectral_stats(A: SparseHermitian, f: Callable, grid_points: int = GRID_POINTS) -> SpectralStats:
    """(Lambda, mu, f_min): spectral norm, min |f| on the spectrum, min |f| on a grid over [-Lambda, Lambda]."""
    lam = A.spectral.eigenvalues
    norm = float(np.max(np.abs(lam)))
    mu = float(np.min(np.abs(apply_pointwise(f, lam))))
    grid = np.linspace(-norm, norm, grid_points)
    f_min = float(np.min(np.abs(apply_pointwise(f, grid))))
    return SpectralStats(norm, mu, f_min)


# matrix file format --------------------------------------------------------


def load_matrix(path: str | Path) -> SparseHermitian:
    """Read a JSON matrix document ``{"dim": N, "entries": [[row, col, re, im], ...]}``.

    Indices are 1-based.  An optional ``"sparsity"`` field declares d.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read matrix file {path}: {exc}") from exc
    return matrix_from_document(doc)


def matrix_from_document(doc: dict) -> SparseHermitian:
    if not isinstance(doc, dict) or "dim" not in doc or "entries" not in doc:
        raise DomainError("matrix document needs 'dim' and 'entries' fields")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise DomainError(f"'dim' must be a positive integer, got {dim!r}")
    entries = []
    for item in doc["entries"]:
        if not isinstance(item, (list, tuple)) or len(item) != 4:
            raise DomainError(f"entry {item!r} is not [row, col, re, im]")
        r, c, re, im = item
        if not all(isinstance(i, int) and not isinstance(i, bool) for i in (r, c)):
            raise DomainError(f"entry {item!r} has non-integer indices")
        entries.append((r - 1, c - 1, complex(float(re), float(im))))
    return SparseHermitian.from_entries(dim, entries, doc.get("sparsity"))


def matrix_to_document(A: SparseHermitian) -> dict:
    """Upper-triangle document for ``A`` (1-based indices)."""
    entries = []
    for j, row in enumerate(A.rows()):
        for k, v in row:
            if k >= j:
                entries.append([j + 1, k + 1, v.real, v.imag])
    return {"dim": A.dim, "sparsity": A.sparsity, "entries": entries}
