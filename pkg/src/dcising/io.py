"""Parsers and serializers: edge-list graphs, trace files, and a binary CSR container.

Edge lists follow the common MAX-CUT benchmark convention: an optional block
of comment lines (starting with ``%`` or ``#``), a header ``n m``, then m
lines ``i j w`` with 1-based node indices. Node indices are converted to
0-based at this boundary only.

Traces serialize to CSV (columns exactly
``iter,elapsed_s,energy,best_energy,cut_value,event``) or JSON lines; floats
are written with 17 significant digits so round-trips are lossless.

The CSR container is little-endian binary: magic ``ICSR1``, u64 n, u64 nnz,
row offsets ((n+1) x u64), column indices (nnz x u64), values (nnz x f64).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import scipy.sparse as sp

from .coupling import CouplingMatrix, CsrCoupling, DenseCoupling
from .generate import GeneratorSpec, instance_from_spec
from .model import ProblemInstance, maxcut_to_ising
from .solvers.common import TraceRecord

MAGIC = b"ICSR1"
TRACE_COLUMNS = ("iter", "elapsed_s", "energy", "best_energy", "cut_value", "event")


class FormatError(ValueError):
    """Malformed file content (with a line number where possible)."""


@dataclass(frozen=True)
class EdgeListGraph:
    n: int
    m: int
    edges: tuple[tuple[int, int, float], ...]  # 1-based endpoints

    def __post_init__(self):
        if self.m != len(self.edges):
            raise FormatError(f"header claims {self.m} edges, found {len(self.edges)}")


def parse_edgelist(text: str) -> EdgeListGraph:
    """Parse a G-set / Biq Mac style edge list.

    Rejects malformed lines (reporting the 1-based line number), out-of-range
    or self-loop endpoints, and duplicate undirected edges.
    """
    header = None
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    n = m = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("%", "#")):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise FormatError(f"line {lineno}: expected header 'n m', got {line!r}")
            try:
                n, m = int(parts[0]), int(parts[1])
            except ValueError:
                raise FormatError(f"line {lineno}: non-integer header {line!r}") from None
            if n < 1 or m < 0:
                raise FormatError(f"line {lineno}: invalid header values n={n} m={m}")
            header = (n, m)
            continue
        if len(parts) != 3:
            raise FormatError(f"line {lineno}: expected 'i j w', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError:
            raise FormatError(f"line {lineno}: malformed edge {line!r}") from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise FormatError(f"line {lineno}: node index out of range 1..{n}")
        if i == j:
            raise FormatError(f"line {lineno}: self-loop at node {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise FormatError(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        edges.append((i, j, w))
    if header is None:
        raise FormatError("empty input: no header line found")
    if len(edges) != m:
        raise FormatError(f"header claims {m} edges, found {len(edges)}")
    return EdgeListGraph(n=n, m=m, edges=tuple(edges))


def graph_to_adjacency(g: EdgeListGraph) -> CsrCoupling:
    """Symmetric CSR adjacency W of the graph (0-based)."""
    if g.m == 0:
        return CsrCoupling.from_scipy(sp.csr_matrix((g.n, g.n)), value_kind="real", validate=False)
    rows = np.array([e[0] - 1 for e in g.edges] + [e[1] - 1 for e in g.edges])
    cols = np.array([e[1] - 1 for e in g.edges] + [e[0] - 1 for e in g.edges])
    vals = np.array([e[2] for e in g.edges] * 2, dtype=np.float64)
    w = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    w.sort_indices()
    kind = "int" if all(float(e[2]).is_integer() for e in g.edges) else "real"
    return CsrCoupling.from_scipy(w, value_kind=kind, validate=False)


def graph_to_instance(g: EdgeListGraph, name: str = "") -> ProblemInstance:
    """Build the Ising instance of a MAX-CUT graph: ``J = -(1/2) W``.

    The affine constant is recorded so cut values can be reported next to
    energies: ``cut(s) = total_weight / 2 - energy(J, s)``.
    """
    w = graph_to_adjacency(g)
    j = maxcut_to_ising(w)
    total_weight = sum(e[2] for e in g.edges)
    return ProblemInstance(coupling=j, name=name, cut_offset=total_weight / 2.0)


# --------------------------------------------------------------------------
# trace files
# --------------------------------------------------------------------------


def _fmt(v) -> str:
    return "" if v is None else f"{v:.17g}"


def write_trace(records: Iterable[TraceRecord], sink, fmt: str = "csv") -> None:
    """Serialize trace records; ``fmt`` is ``csv`` or ``jsonl``.

    Iterations must be strictly increasing.
    """
    records = list(records)
    iters = [r.iteration for r in records]
    if any(b <= a for a, b in zip(iters, iters[1:])):
        raise ValueError("trace iterations must be strictly increasing")
    own, fh = _open(sink, "w")
    try:
        if fmt == "csv":
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for r in records:
                fh.write(
                    f"{r.iteration},{_fmt(r.elapsed_s)},{_fmt(r.energy)},"
                    f"{_fmt(r.best_energy)},{_fmt(r.cut_value)},{r.event or ''}\n"
                )
        elif fmt == "jsonl":
            for r in records:
                fh.write(
                    json.dumps(
                        {
                            "iter": r.iteration,
                            "elapsed_s": r.elapsed_s,
                            "energy": r.energy,
                            "best_energy": r.best_energy,
                            "cut_value": r.cut_value,
                            "event": r.event,
                        }
                    )
                    + "\n"
                )
        else:
            raise ValueError(f"unknown trace format {fmt!r}")
    finally:
        if own:
            fh.close()


def read_trace(source, fmt: str = "csv") -> list[TraceRecord]:
    """Parse a trace file, validating the schema and the trace invariants
    (strictly increasing iterations, nonincreasing best energy)."""
    own, fh = _open(source, "r")
    try:
        lines = fh.read().splitlines()
    finally:
        if own:
            fh.close()
    records: list[TraceRecord] = []
    if fmt == "csv":
        if not lines or lines[0] != ",".join(TRACE_COLUMNS):
            raise FormatError("bad or missing CSV header")
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(TRACE_COLUMNS):
                raise FormatError(f"line {lineno}: expected {len(TRACE_COLUMNS)} fields")
            try:
                records.append(
                    TraceRecord(
                        iteration=int(parts[0]),
                        elapsed_s=float(parts[1]),
                        energy=float(parts[2]),
                        best_energy=float(parts[3]),
                        cut_value=float(parts[4]) if parts[4] else None,
                        event=parts[5] or None,
                    )
                )
            except ValueError:
                raise FormatError(f"line {lineno}: malformed record") from None
    elif fmt == "jsonl":
        for lineno, line in enumerate(lines, start=1):
            if not line:
                continue
            try:
                d = json.loads(line)
                records.append(
                    TraceRecord(
                        iteration=int(d["iter"]),
                        elapsed_s=float(d["elapsed_s"]),
                        energy=float(d["energy"]),
                        best_energy=float(d["best_energy"]),
                        cut_value=None if d.get("cut_value") is None else float(d["cut_value"]),
                        event=d.get("event"),
                    )
                )
            except (KeyError, TypeError, json.JSONDecodeError):
                raise FormatError(f"line {lineno}: malformed record") from None
    else:
        raise ValueError(f"unknown trace format {fmt!r}")
    iters = [r.iteration for r in records]
    if any(b <= a for a, b in zip(iters, iters[1:])):
        raise FormatError("iterations are not strictly increasing")
    bests = [r.best_energy for r in records]
    if any(b > a for a, b in zip(bests, bests[1:])):
        raise FormatError("best_energy is not nonincreasing")
    return records


# --------------------------------------------------------------------------
# binary CSR container
# --------------------------------------------------------------------------


def _open(target, mode: str):
    if isinstance(target, (str, Path)):
        binary = "b" in mode
        return True, open(target, mode if binary else mode, encoding=None if binary else "utf-8")
    return False, target


def coupling_to_csr(J: CouplingMatrix) -> CsrCoupling:
    if isinstance(J, CsrCoupling):
        return J
    if isinstance(J, DenseCoupling):
        return CsrCoupling.from_scipy(
            sp.csr_matrix(J.array), value_kind=J.value_kind, validate=False
        )
    raise ValueError("only dense or CSR matrices can be converted to the CSR container")


def csr_save(J: CouplingMatrix, sink) -> None:
    """Write a coupling matrix to the binary CSR container."""
    m = coupling_to_csr(J)
    own, fh = _open(sink, "wb")
    try:
        fh.write(MAGIC)
        fh.write(np.uint64(m.n).tobytes())
        fh.write(np.uint64(m.nnz).tobytes())
        fh.write(m.row_offsets.astype("<u8").tobytes())
        fh.write(m.col_indices.astype("<u8").tobytes())
        fh.write(m.values.astype("<f8").tobytes())
    finally:
        if own:
            fh.close()


def csr_load(source) -> CsrCoupling:
    """Read the binary CSR container, validating magic, sizes and the CSR
    invariants; truncated files error out with no partial matrix."""
    own, fh = _open(source, "rb")
    try:
        blob = fh.read()
    finally:
        if own:
            fh.close()
    if blob[: len(MAGIC)] != MAGIC:
        raise FormatError("bad magic: not a CSR container")
    off = len(MAGIC)

    def take(count: int, dtype: str) -> np.ndarray:
        nonlocal off
        nbytes = count * np.dtype(dtype).itemsize
        if off + nbytes > len(blob):
            raise FormatError("truncated CSR container")
        out = np.frombuffer(blob[off : off + nbytes], dtype=dtype)
        off += nbytes
        return out

    n = int(take(1, "<u8")[0])
    nnz = int(take(1, "<u8")[0])
    row_offsets = take(n + 1, "<u8").astype(np.int64)
    col_indices = take(nnz, "<u8").astype(np.int64)
    values = take(nnz, "<f8").astype(np.float64)
    if off != len(blob):
        raise FormatError("trailing bytes after CSR payload")
    values_int = bool(nnz) and bool(np.all(values == np.round(values)))
    return CsrCoupling(
        n, values, col_indices, row_offsets,
        value_kind="int" if values_int else "real",
        validate=True,
    )


# --------------------------------------------------------------------------
# instance files
# --------------------------------------------------------------------------


def save_genspec(spec: GeneratorSpec, sink) -> None:
    own, fh = _open(sink, "w")
    try:
        json.dump(
            {
                "kind": spec.kind,
                "n": spec.n,
                "seed": spec.seed,
                "connectivity_pct": spec.connectivity_pct,
            },
            fh,
        )
        fh.write("\n")
    finally:
        if own:
            fh.close()


def load_instance(path: Union[str, Path]) -> ProblemInstance:
    """Load an instance file: ``.icsr`` container, ``.json`` generator spec,
    or an edge-list graph (anything else)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".icsr":
        return ProblemInstance(coupling=csr_load(path), name=path.stem)
    if suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        spec = GeneratorSpec(
            kind=d["kind"],
            n=int(d["n"]),
            seed=int(d.get("seed", 0)),
            connectivity_pct=d.get("connectivity_pct"),
        )
        return instance_from_spec(spec)
    text = path.read_text(encoding="utf-8")
    return graph_to_instance(parse_edgelist(text), name=path.stem)
