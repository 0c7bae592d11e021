"""Benchmark-instance generators.

Four families:

* ``sk_gaussian``   -- fully connected, off-diagonals i.i.d. standard normal;
* ``dense_pm1``     -- fully connected, off-diagonals +-1 with equal
                       probability (the 2000-node MAX-CUT benchmark shape);
* ``sparse_9bit``   -- sparse CSR with small-integer couplings: for each
                       lower-triangular pair draw z uniform in {1..N_p},
                       N_p = floor(102300 / p), and keep J_ij = z - 511 when
                       z < 1023 (realized values {-510..511}, acceptance
                       probability 1022/N_p);
* ``procedural_sin`` -- formula couplings sin(i*j + seed) on 0-based indices,
                       never stored.

Randomness is counter-based (Philox keyed by (seed, row)), so any row range
can be generated independently, in parallel, and reproducibly: the same
(spec, seed) always yields byte-identical matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .coupling import CouplingMatrix, CsrCoupling, DenseCoupling, ProceduralCoupling
from .model import ProblemInstance

GENERATOR_KINDS = ("sk_gaussian", "dense_pm1", "sparse_9bit", "procedural_sin")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    seed: int = 0
    connectivity_pct: Optional[float] = None  # sparse_9bit only

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.kind == "sparse_9bit":
            p = self.connectivity_pct
            if p is None or not (0 < p <= 100):
                raise ValueError("sparse_9bit needs connectivity_pct in (0, 100]")


def _row_rng(seed: int, row: int) -> np.random.Generator:
    """Independent per-row stream: Philox keyed by (seed, row)."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, row], dtype=np.uint64)))


def gen_sk(n: int, seed: int = 0) -> DenseCoupling:
    """Fully connected couplings with standard-normal off-diagonals."""
    if n < 2:
        raise ValueError("n must be >= 2")
    a = np.zeros((n, n))
    for i in range(1, n):
        a[i, :i] = _row_rng(seed, i).standard_normal(i)
    a = a + a.T
    return DenseCoupling(a, value_kind="real", validate=False)


def gen_dense_pm1(n: int, seed: int = 0) -> DenseCoupling:
    """Fully connected +-1 couplings with equal probability."""
    if n < 2:
        raise ValueError("n must be >= 2")
    a = np.zeros((n, n))
    for i in range(1, n):
        a[i, :i] = _row_rng(seed, i).integers(0, 2, size=i) * 2.0 - 1.0
    a = a + a.T
    return DenseCoupling(a, value_kind="int", validate=False)


def gen_sparse_9bit(n: int, p: float, seed: int = 0) -> CsrCoupling:
    """Sparse small-integer couplings at about (1022 / N_p) density.

    Rows of the lower triangle are generated one at a time and the symmetric
    closure is built sparsely, so memory stays O(nnz) -- no dense n x n
    buffer is ever allocated.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (0 < p <= 100):
        raise ValueError("connectivity percent must lie in (0, 100]")
    n_p = int(102300 // p)
    data: list[np.ndarray] = []
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    for i in range(1, n):
        z = _row_rng(seed, i).integers(1, n_p + 1, size=i)
        keep = z < 1023
        vals = (z[keep] - 511).astype(np.float64)
        js = np.nonzero(keep)[0].astype(np.int64)
        data.append(vals)
        rows.append(np.full(js.size, i, dtype=np.int64))
        cols.append(js)
    vals = np.concatenate(data) if data else np.empty(0)
    r = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    # symmetrize via COO so explicit zeros (z = 511) stay stored entries
    full = sp.csr_matrix(
        (np.concatenate([vals, vals]), (np.concatenate([r, c]), np.concatenate([c, r]))),
        shape=(n, n),
    )
    full.sort_indices()
    return CsrCoupling.from_scipy(full, value_kind="int", validate=False)


def gen_procedural_sin(n: int, seed: int = 100) -> ProceduralCoupling:
    """Formula couplings ``entry(i, j) = sin(i * j + seed)`` for i != j.

    The diagonal is forced to zero (the raw formula would put sin(i^2 + seed)
    there, which only shifts spin energies by a constant but would perturb
    the continuous Hamiltonian).
    """
    return ProceduralCoupling(n, seed=seed, formula="sin_product")


def generate(spec: GeneratorSpec) -> CouplingMatrix:
    if spec.kind == "sk_gaussian":
        return gen_sk(spec.n, spec.seed)
    if spec.kind == "dense_pm1":
        return gen_dense_pm1(spec.n, spec.seed)
    if spec.kind == "sparse_9bit":
        return gen_sparse_9bit(spec.n, spec.connectivity_pct, spec.seed)
    if spec.kind == "procedural_sin":
        return gen_procedural_sin(spec.n, spec.seed)
    raise ValueError(f"unknown generator kind {spec.kind!r}")


def instance_from_spec(spec: GeneratorSpec) -> ProblemInstance:
    suffix = "" if spec.connectivity_pct is None else f"-p{spec.connectivity_pct:g}"
    name = f"{spec.kind}-n{spec.n}{suffix}-s{spec.seed}"
    return ProblemInstance(coupling=generate(spec), name=name)
