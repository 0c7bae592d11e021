"""Core model: Ising energy, homogeneous reduction, and the MAX-CUT correspondence.

Conventions: spins live in {-1, +1}^n, couplings are symmetric with zero
diagonal, and the homogeneous energy is ``E(s) = -(1/2) s.T J s``. A model
with an external field h is equivalent to an (n+1)-spin homogeneous model
whose coupling carries J in the leading block and h on the border; the
ground state of the original model is recovered by multiplying the first n
spins of the bordered ground state by the auxiliary spin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import matvec as mv
from .coupling import (
    CouplingError,
    CouplingMatrix,
    CsrCoupling,
    DenseCoupling,
    ProceduralCoupling,
)

MATERIALIZE_LIMIT = 100_000  # homogenized size above which a bordered view is used


def spins_from(x: np.ndarray) -> np.ndarray:
    """Componentwise sign with the tie sign(0) = +1, as float64 +-1."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def validate_spins(s: np.ndarray, n: int | None = None) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if n is not None and s.shape != (n,):
        raise ValueError(f"spin vector has length {s.shape}, expected {n}")
    if not np.all(np.abs(s) == 1.0):
        raise ValueError("spin entries must be exactly -1 or +1")
    return s


@dataclass(frozen=True)
class ProblemInstance:
    """A coupling matrix plus optional external field and provenance metadata.

    ``cut_offset`` is set when the instance was converted from a graph: the
    cut value of a partition s is then ``cut_offset - energy(J, s)``.
    """

    coupling: CouplingMatrix
    field: Optional[np.ndarray] = None
    name: str = ""
    best_known: Optional[float] = None
    cut_offset: Optional[float] = None

    def __post_init__(self):
        if self.field is not None:
            h = np.ascontiguousarray(self.field, dtype=np.float64)
            if h.shape != (self.coupling.n,):
                raise ValueError("field length must equal coupling.n")
            if not np.all(np.isfinite(h)):
                raise ValueError("field entries must be finite")
            h.setflags(write=False)
            object.__setattr__(self, "field", h)

    @property
    def n(self) -> int:
        return self.coupling.n

    def cut_value_of(self, energy: float) -> Optional[float]:
        if self.cut_offset is None:
            return None
        return self.cut_offset - energy


def energy(J: CouplingMatrix, s: np.ndarray) -> float:
    """Homogeneous Ising energy ``-(1/2) s.T J s`` (one matvec + one dot).

    Also valid for continuous vectors; no +-1 check is applied here.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (J.n,):
        raise ValueError(f"vector length {s.shape} does not match n={J.n}")
    return mv.operator_energy(J, s)[1]


def energy_with_field(J: CouplingMatrix, h: np.ndarray, s: np.ndarray) -> float:
    """Ising energy with external field: ``-(1/2) s.T J s - h.T s``."""
    h = np.asarray(h, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if h.shape != (J.n,) or s.shape != (J.n,):
        raise ValueError("dimension mismatch between J, h, s")
    return energy(J, s) - float(h @ s)


def instance_energy(instance: ProblemInstance, s: np.ndarray) -> float:
    if instance.field is None:
        return energy(instance.coupling, s)
    return energy_with_field(instance.coupling, instance.field, s)


class BorderedCoupling(CouplingMatrix):
    """Lazy (n+1)-spin view of (J, h): J in the leading block, h on the border.

    Used instead of materializing the homogenized matrix when n+1 exceeds
    ``MATERIALIZE_LIMIT`` or the base matrix is procedural.
    """

    def __init__(self, base: CouplingMatrix, border: np.ndarray):
        border = np.ascontiguousarray(border, dtype=np.float64)
        if border.shape != (base.n,):
            raise ValueError("border length must equal base.n")
        self.base = base
        self.border = border
        self.border.setflags(write=False)
        self.n = base.n + 1
        self.value_kind = base.value_kind

    def entry(self, i: int, j: int) -> float:
        m = self.base.n
        if i == j:
            return 0.0
        if i < m and j < m:
            return self.base.entry(i, j)
        k = j if i == m else i
        return float(self.border[k])

    def block(self, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        m = self.base.n
        out = np.zeros((r1 - r0, c1 - c0))
        br1, bc1 = min(r1, m), min(c1, m)
        if r0 < m and c0 < m:
            out[: br1 - r0, : bc1 - c0] = self.base.block(r0, br1, c0, bc1)
        if r1 > m and c0 < m:  # last row holds h
            out[-1, : bc1 - c0] = self.border[c0:bc1]
        if c1 > m and r0 < m:  # last column holds h
            out[: br1 - r0, -1] = self.border[r0:br1]
        return out

    def dot(self, v: np.ndarray) -> np.ndarray:
        m = self.base.n
        y = np.empty(self.n)
        y[:m] = mv.matvec(self.base, v[:m]) + v[m] * self.border
        y[m] = float(self.border @ v[:m])
        return y

    def abs_row_sums(self) -> np.ndarray:
        out = np.empty(self.n)
        ab = np.abs(self.border)
        out[: self.base.n] = self.base.abs_row_sums() + ab
        out[self.base.n] = ab.sum()
        return out

    def offdiag_moments(self) -> tuple[float, float]:
        s, s2 = self.base.offdiag_moments()
        return s + 2.0 * self.border.sum(), s2 + 2.0 * float(self.border @ self.border)

    def nnz_offdiag(self) -> int:
        return self.n * (self.n - 1)

    def validate(self) -> None:
        if not np.all(np.isfinite(self.border)):
            raise CouplingError("border must be finite")


def homogenize(J: CouplingMatrix, h: np.ndarray) -> CouplingMatrix:
    """Fold an external field into one auxiliary spin.

    Returns the (n+1)-coupling with J in the leading n x n block, h as the
    last row/column, and zero in the corner. Energies satisfy
    ``E_hom((s, t)) == E(J, h, t * s)`` for every s and t in {-1, 1}.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (J.n,):
        raise ValueError("field length must equal J.n")
    n1 = J.n + 1
    if isinstance(J, ProceduralCoupling) or n1 > MATERIALIZE_LIMIT:
        return BorderedCoupling(J, h)
    if isinstance(J, DenseCoupling):
        out = np.zeros((n1, n1))
        out[: J.n, : J.n] = J.array
        out[: J.n, -1] = h
        out[-1, : J.n] = h
        return DenseCoupling(out, value_kind=J.value_kind, validate=False)
    if isinstance(J, CsrCoupling):
        col = sp.csr_matrix(h.reshape(-1, 1))
        full = sp.bmat([[J._sp, col], [col.T, None]], format="csr")
        full.sort_indices()
        return CsrCoupling.from_scipy(full, value_kind=J.value_kind, validate=False)
    return BorderedCoupling(J, h)


def dehomogenize(sigma: np.ndarray) -> np.ndarray:
    """Map a bordered ground state (s0, t0) back to t0 * s0."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape[0] < 2:
        raise ValueError("need at least 2 spins to dehomogenize")
    return sigma[-1] * sigma[:-1]


def homogenized_instance(instance: ProblemInstance) -> ProblemInstance:
    """Return an equivalent field-free instance (identity if already field-free)."""
    if instance.field is None:
        return instance
    return ProblemInstance(
        coupling=homogenize(instance.coupling, instance.field),
        name=instance.name + "+aux" if instance.name else "homogenized",
        best_known=instance.best_known,
    )


def maxcut_to_ising(W: CouplingMatrix) -> CouplingMatrix:
    """Convert a weighted adjacency matrix to couplings via ``J = -(1/2) W``.

    Maximizing the cut of W is then equivalent to minimizing the homogeneous
    Ising energy of J.
    """
    if isinstance(W, DenseCoupling):
        W.validate()
        return DenseCoupling(-0.5 * W.array, value_kind="real", validate=False)
    if isinstance(W, CsrCoupling):
        W.validate()
        return CsrCoupling(
            W.n, -0.5 * W.values, W.col_indices, W.row_offsets, value_kind="real", validate=False
        )
    raise CouplingError("MAX-CUT conversion expects dense or CSR adjacency")


def cut_value(W: CouplingMatrix, s: np.ndarray) -> float:
    """Total weight of edges crossing the partition induced by s.

    Each undirected edge is counted once; entries are summed directly over the
    crossing pairs rather than through the energy identity.
    """
    s = validate_spins(s, W.n)
    if isinstance(W, DenseCoupling):
        cross = np.not_equal.outer(s > 0, s > 0)
        return float(W.array[np.triu(cross)].sum())
    if isinstance(W, CsrCoupling):
        rows = np.repeat(np.arange(W.n), np.diff(W.row_offsets))
        mask = s[rows] != s[W.col_indices]
        return float(W.values[mask].sum()) / 2.0  # symmetric storage: each edge twice
    # procedural / bordered: stream blocks
    total = 0.0
    b = 1024
    for r0 in range(0, W.n, b):
        r1 = min(r0 + b, W.n)
        for c0 in range(r0, W.n, b):
            c1 = min(c0 + b, W.n)
            tile = W.block(r0, r1, c0, c1)
            cross = np.not_equal.outer(s[r0:r1] > 0, s[c0:c1] > 0)
            if c0 == r0:
                cross = np.triu(cross)
            total += float(tile[cross].sum())
    return total
