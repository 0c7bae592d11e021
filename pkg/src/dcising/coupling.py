"""Coupling-matrix storage backends: dense, CSR, and procedural (formula-defined).

A coupling matrix is symmetric with a zero diagonal. Three storage layouts are
supported:

* dense      -- a full ``(n, n)`` float64 array,
* CSR        -- values / column indices / row offsets (compressed sparse row),
* procedural -- a deterministic formula ``(i, j) -> value`` evaluated on
                demand, never stored; blocks are materialized transiently.

All backends expose ``entry``, ``block`` (dense tile materialization) and
``abs_row_sums`` / ``offdiag_moments`` (the statistics needed for parameter
derivation). Dense and CSR additionally expose a native ``dot``; products for
procedural matrices go through :mod:`dcising.matvec`.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class CouplingError(ValueError):
    """Raised when a matrix violates the coupling invariants."""


def _as_index_range(start: int, stop: int, n: int) -> None:
    if not (0 <= start <= stop <= n):
        raise IndexError(f"block range [{start}, {stop}) out of bounds for n={n}")


class CouplingMatrix:
    """Base class for symmetric zero-diagonal coupling matrices."""

    n: int
    value_kind: str  # "real" or "int"

    def entry(self, i: int, j: int) -> float:
        raise NotImplementedError

    def block(self, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        """Materialize rows [r0, r1) x cols [c0, c1) as a dense array."""
        raise NotImplementedError

    def abs_row_sums(self) -> np.ndarray:
        """Per-row sums of |J_ij| over j != i."""
        raise NotImplementedError

    def offdiag_moments(self) -> tuple[float, float]:
        """Return (sum, sum of squares) of all n(n-1) off-diagonal entries.

        Structural zeros of sparse storage count as entries, so the moments
        are always taken over the full off-diagonal index set.
        """
        raise NotImplementedError

    def nnz_offdiag(self) -> int:
        """Number of stored (possibly zero-valued) off-diagonal entries."""
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        return self.block(0, self.n, 0, self.n)

    def validate(self) -> None:
        raise NotImplementedError

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}(n={self.n}, value_kind={self.value_kind!r})"


class DenseCoupling(CouplingMatrix):
    """Coupling matrix held as a full symmetric float64 array."""

    def __init__(self, array: np.ndarray, value_kind: str = "real", validate: bool = True):
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise CouplingError(f"expected square array, got shape {array.shape}")
        self.array = array
        self.array.setflags(write=False)
        self.n = array.shape[0]
        self.value_kind = value_kind
        if validate:
            self.validate()

    def validate(self) -> None:
        if not np.all(np.isfinite(self.array)):
            raise CouplingError("couplings must be finite")
        if np.any(np.diagonal(self.array) != 0.0):
            raise CouplingError("diagonal must be zero")
        if not np.array_equal(self.array, self.array.T):
            raise CouplingError("coupling matrix must be symmetric")

    def entry(self, i: int, j: int) -> float:
        return float(self.array[i, j])

    def block(self, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        _as_index_range(r0, r1, self.n)
        _as_index_range(c0, c1, self.n)
        return self.array[r0:r1, c0:c1]

    def dot(self, v: np.ndarray) -> np.ndarray:
        return self.array @ v

    def abs_row_sums(self) -> np.ndarray:
        return np.abs(self.array).sum(axis=1)

    def offdiag_moments(self) -> tuple[float, float]:
        a = self.array
        return float(a.sum()), float((a * a).sum())  # diagonal is zero

    def nnz_offdiag(self) -> int:
        return self.n * (self.n - 1)


class CsrCoupling(CouplingMatrix):
    """Coupling matrix in compressed sparse row form.

    Invariants: ``row_offsets`` is nondecreasing with length n+1, column
    indices are strictly increasing within each row, no stored diagonal
    entries, and the stored pattern/values are symmetric.
    """

    def __init__(
        self,
        n: int,
        values: np.ndarray,
        col_indices: np.ndarray,
        row_offsets: np.ndarray,
        value_kind: str = "real",
        validate: bool = True,
    ):
        self.n = int(n)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.col_indices = np.ascontiguousarray(col_indices, dtype=np.int64)
        self.row_offsets = np.ascontiguousarray(row_offsets, dtype=np.int64)
        for arr in (self.values, self.col_indices, self.row_offsets):
            arr.setflags(write=False)
        self.value_kind = value_kind
        self._sp = sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets), shape=(self.n, self.n)
        )
        if validate:
            self.validate()

    @classmethod
    def from_scipy(cls, m: sp.spmatrix, value_kind: str = "real", validate: bool = True) -> "CsrCoupling":
        m = m.tocsr()
        m.sort_indices()
        return cls(m.shape[0], m.data, m.indices, m.indptr, value_kind, validate=validate)

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    def validate(self) -> None:
        if self.row_offsets.shape != (self.n + 1,):
            raise CouplingError("row_offsets must have length n+1")
        if self.row_offsets[0] != 0 or np.any(np.diff(self.row_offsets) < 0):
            raise CouplingError("row_offsets must be nondecreasing and start at 0")
        if self.row_offsets[-1] != len(self.values) or len(self.values) != len(self.col_indices):
            raise CouplingError("values/col_indices length must match row_offsets[-1]")
        if len(self.col_indices) and (
            self.col_indices.min() < 0 or self.col_indices.max() >= self.n
        ):
            raise CouplingError("column index out of range")
        for i in range(self.n):
            cols = self.col_indices[self.row_offsets[i] : self.row_offsets[i + 1]]
            if cols.size and np.any(np.diff(cols) <= 0):
                raise CouplingError(f"column indices not strictly increasing in row {i}")
            if np.any(cols == i):
                raise CouplingError(f"stored diagonal entry in row {i}")
        if not np.all(np.isfinite(self.values)):
            raise CouplingError("couplings must be finite")
        if (self._sp != self._sp.T).nnz != 0:
            raise CouplingError("coupling matrix must be symmetric")

    def entry(self, i: int, j: int) -> float:
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        k = np.searchsorted(self.col_indices[lo:hi], j)
        if k < hi - lo and self.col_indices[lo + k] == j:
            return float(self.values[lo + k])
        return 0.0

    def block(self, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        _as_index_range(r0, r1, self.n)
        _as_index_range(c0, c1, self.n)
        return self._sp[r0:r1, c0:c1].toarray()

    def dot(self, v: np.ndarray) -> np.ndarray:
        return self._sp @ v

    def row_slice(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Return (column indices, values) of row i."""
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def abs_row_sums(self) -> np.ndarray:
        out = np.zeros(self.n)
        np.add.at(out, np.repeat(np.arange(self.n), np.diff(self.row_offsets)), np.abs(self.values))
        return out

    def offdiag_moments(self) -> tuple[float, float]:
        return float(self.values.sum()), float((self.values * self.values).sum())

    def nnz_offdiag(self) -> int:
        return self.n * (self.n - 1)  # structural zeros included


class ProceduralCoupling(CouplingMatrix):
    """Coupling matrix defined by a deterministic formula, generated on demand.

    ``formula`` names a registered entry function taking 0-based integer index
    arrays and returning values; the diagonal is forced to zero regardless of
    the formula. No O(n^2) storage is ever allocated: callers materialize
    blocks transiently via :meth:`block`.
    """

    def __init__(self, n: int, seed: int = 100, formula: str = "sin_product", block_size: int = 1024):
        if n < 2:
            raise CouplingError("procedural matrices need n >= 2")
        self.n = int(n)
        self.seed = int(seed)
        self.formula = formula
        self.block_size = int(block_size)
        self.value_kind = "real"
        if formula not in _PROCEDURAL_FORMULAS:
            raise CouplingError(f"unknown procedural formula {formula!r}")
        self._fn = _PROCEDURAL_FORMULAS[formula]

    def entry(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(self._fn(np.asarray(i), np.asarray(j), self.seed))

    def block(self, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        _as_index_range(r0, r1, self.n)
        _as_index_range(c0, c1, self.n)
        rows = np.arange(r0, r1)[:, None]
        cols = np.arange(c0, c1)[None, :]
        out = self._fn(rows, cols, self.seed)
        diag = rows == cols
        if diag.any():
            out = np.where(diag, 0.0, out)
        return out

    def _blockwise_reduce(self, tile_fn) -> float:
        total = 0.0
        b = self.block_size
        for r0 in range(0, self.n, b):
            r1 = min(r0 + b, self.n)
            for c0 in range(0, self.n, b):
                c1 = min(c0 + b, self.n)
                total += tile_fn(self.block(r0, r1, c0, c1))
        return total

    def abs_row_sums(self) -> np.ndarray:
        out = np.zeros(self.n)
        b = self.block_size
        for r0 in range(0, self.n, b):
            r1 = min(r0 + b, self.n)
            acc = np.zeros(r1 - r0)
            for c0 in range(0, self.n, b):
                c1 = min(c0 + b, self.n)
                acc += np.abs(self.block(r0, r1, c0, c1)).sum(axis=1)
            out[r0:r1] = acc
        return out

    def offdiag_moments(self) -> tuple[float, float]:
        s = self._blockwise_reduce(lambda t: float(t.sum()))
        s2 = self._blockwise_reduce(lambda t: float((t * t).sum()))
        return s, s2

    def nnz_offdiag(self) -> int:
        return self.n * (self.n - 1)

    def validate(self, samples: int = 64, seed: int = 0) -> None:
        """Spot-check symmetry on random index pairs (formula-defined storage
        cannot be checked exhaustively)."""
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, self.n, size=samples)
        jj = rng.integers(0, self.n, size=samples)
        for i, j in zip(ii, jj):
            if self.entry(int(i), int(j)) != self.entry(int(j), int(i)):
                raise CouplingError(f"asymmetric procedural entry at ({i}, {j})")
        if any(self.entry(int(i), int(i)) != 0.0 for i in ii):
            raise CouplingError("procedural diagonal must be zero")


def _sin_product(i, j, seed):
    return np.sin(i * j + float(seed))


_PROCEDURAL_FORMULAS = {
    "sin_product": _sin_product,
}
