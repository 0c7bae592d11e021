"""Matrix-vector products: storage-native paths and a blocked multi-worker engine.

The blocked engine partitions the matrix into ``b x b`` tiles, materializes
each tile on demand (for procedural storage), computes the partial product
``y[i:i+b] += J_tile @ v[j:j+b]`` and discards the tile. Tiles are distributed
over a worker pool; partial sums for each row range are reduced in a fixed
tile order so the result is bitwise identical for any worker count or
scheduling. CSR matrices use whole row blocks as the unit of work (no column
tiling), which needs no cross-worker reduction at all.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coupling import CouplingMatrix, CsrCoupling, DenseCoupling

DEFAULT_BLOCK_SIZE = 1024

_config = {"workers": 1, "block_size": DEFAULT_BLOCK_SIZE}


def configure(workers: int | None = None, block_size: int | None = None) -> None:
    """Set process-wide defaults for the blocked engine (config keys:
    ``workers``, ``block_size``)."""
    if workers is not None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        _config["workers"] = int(workers)
    if block_size is not None:
        if block_size < 1:
            raise ValueError("block_size must be >= 1")
        _config["block_size"] = int(block_size)


def get_config() -> dict:
    return dict(_config)


@dataclass(frozen=True)
class BlockPlan:
    """Tile decomposition and worker assignment for a blocked product.

    ``assignment[w]`` lists the tile ids owned by worker ``w``; tile id
    ``(bi, bj)`` covers rows ``[bi*block, ...)`` and columns ``[bj*block, ...)``.
    Tiles must partition the index space exactly once and no tile may appear
    in two workers' lists.
    """

    n: int
    block: int
    workers: int
    assignment: tuple[tuple[tuple[int, int], ...], ...] = field(default=())

    def __post_init__(self):
        if self.n < 1 or self.block < 1 or self.workers < 1:
            raise ValueError("n, block and workers must be positive")
        if not self.assignment:
            object.__setattr__(self, "assignment", _round_robin(self.n, self.block, self.workers))
        if len(self.assignment) != self.workers:
            raise ValueError("assignment must have one tile list per worker")
        nb = self.num_blocks
        seen = set()
        for tiles in self.assignment:
            for t in tiles:
                if t in seen:
                    raise ValueError(f"tile {t} assigned twice")
                seen.add(t)
        expected = {(i, j) for i in range(nb) for j in range(nb)}
        if seen != expected:
            raise ValueError("tiles must partition the index space exactly once")

    @property
    def num_blocks(self) -> int:
        return -(-self.n // self.block)

    def row_range(self, bi: int) -> tuple[int, int]:
        return bi * self.block, min((bi + 1) * self.block, self.n)


def _round_robin(n: int, block: int, workers: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    nb = -(-n // block)
    tiles = [(i, j) for i in range(nb) for j in range(nb)]
    lists: list[list[tuple[int, int]]] = [[] for _ in range(workers)]
    for k, t in enumerate(tiles):
        lists[k % workers].append(t)
    return tuple(tuple(ts) for ts in lists)


def default_plan(n: int, block: int | None = None, workers: int | None = None) -> BlockPlan:
    block = block or _config["block_size"]
    workers = workers or _config["workers"]
    return BlockPlan(n=n, block=min(block, n), workers=workers)


def matvec(J: CouplingMatrix, v: np.ndarray, plan: BlockPlan | None = None) -> np.ndarray:
    """Compute ``J @ v`` along the storage-native path.

    Dense and CSR matrices use their native products; procedural matrices go
    through the blocked engine (they have no materialized form).
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (J.n,):
        raise ValueError(f"vector length {v.shape} does not match n={J.n}")
    if isinstance(J, (DenseCoupling, CsrCoupling)):
        if plan is not None and plan.workers > 1:
            return blocked_matvec(J, v, plan)
        return J.dot(v)
    if plan is None:
        plan = default_plan(J.n)
    return blocked_matvec(J, v, plan)


def blocked_matvec(J: CouplingMatrix, v: np.ndarray, plan: BlockPlan) -> np.ndarray:
    """Blocked multi-worker product with a deterministic reduction order.

    Each worker computes the partial products of its assigned tiles; the
    per-row-range partials are then summed in increasing column-block order,
    independent of which worker produced them or when.
    """
    v = np.asarray(v, dtype=np.float64)
    if plan.n != J.n or v.shape != (J.n,):
        raise ValueError("plan/vector dimensions do not match the matrix")

    if isinstance(J, CsrCoupling):
        return _blocked_csr(J, v, plan)

    def run_tiles(tiles):
        out = {}
        for bi, bj in tiles:
            r0, r1 = plan.row_range(bi)
            c0, c1 = plan.row_range(bj)
            out[(bi, bj)] = J.block(r0, r1, c0, c1) @ v[c0:c1]
        return out

    partials: dict[tuple[int, int], np.ndarray] = {}
    if plan.workers == 1:
        partials = run_tiles(plan.assignment[0])
    else:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            for chunk in pool.map(run_tiles, plan.assignment):
                partials.update(chunk)

    y = np.zeros(J.n)
    nb = plan.num_blocks
    for bi in range(nb):
        r0, r1 = plan.row_range(bi)
        acc = np.zeros(r1 - r0)
        for bj in range(nb):  # fixed order: bitwise-reproducible reduction
            acc += partials[(bi, bj)]
        y[r0:r1] = acc
    return y


def _blocked_csr(J: CsrCoupling, v: np.ndarray, plan: BlockPlan) -> np.ndarray:
    """Row blocks are the unit of work for CSR; each block is independent."""
    nb = plan.num_blocks
    row_blocks = list(range(nb))

    def run(blocks):
        return {bi: J._sp[slice(*plan.row_range(bi)), :] @ v for bi in blocks}

    results: dict[int, np.ndarray] = {}
    if plan.workers == 1:
        results = run(row_blocks)
    else:
        chunks = [row_blocks[w :: plan.workers] for w in range(plan.workers)]
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            for chunk in pool.map(run, chunks):
                results.update(chunk)
    y = np.zeros(J.n)
    for bi in row_blocks:
        r0, r1 = plan.row_range(bi)
        y[r0:r1] = results[bi]
    return y


def operator_energy(
    J: CouplingMatrix, x: np.ndarray, plan: BlockPlan | None = None
) -> tuple[np.ndarray, float]:
    """Return ``(J @ x, -(1/2) x.T (J x))`` from a single product pass.

    Solvers use this so each iteration spends exactly one matrix-vector
    multiplication for both the update and the energy bookkeeping.
    """
    y = matvec(J, x, plan)
    return y, -0.5 * float(x @ y)
