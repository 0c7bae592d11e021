"""Benchmark harness: exact oracle, restarts, time-to-solution, reports.

The oracle enumerates all 2^n spin configurations with Gray-code incremental
energy updates (hard cap n <= 24) and breaks ties toward the
lexicographically smallest spin vector (-1 before +1). ``run_bench`` runs
each configured solver R times with seeds ``seed + r``, aggregates best /
mean energies and energy histograms, and computes the average time to reach
``tts_fraction`` of a reference quality (cut value when the instance came
from a graph, -energy otherwise). Runs that never reach the threshold are
excluded from the average and their count is disclosed.
"""

from __future__ import annotations

import datetime
import json
import math
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import scipy

from . import io as dio
from .model import ProblemInstance
from .solvers import SOLVER_NAMES, solve
from .solvers.baselines import sa_solve
from .solvers.common import TraceRecord

BRUTE_FORCE_CAP = 24
LONG_SA_STEPS = 100_000


def brute_force_ground_state(
    instance: ProblemInstance, cap: int = BRUTE_FORCE_CAP
) -> tuple[np.ndarray, float]:
    """Exact minimizer by exhaustive enumeration (n <= 24).

    Gray-code order flips one spin per visited state, so each step costs one
    O(n) local-field update. Degenerate minima resolve to the
    lexicographically smallest spin vector.
    """
    n = instance.n
    if n > cap:
        raise ValueError(f"brute force capped at n={cap}, got n={n}")
    J = instance.coupling.to_dense()
    h = instance.field if instance.field is not None else np.zeros(n)

    s = -np.ones(n)
    f = J @ s
    energy = -0.5 * float(s @ f) - float(h @ s)

    def key(sv: np.ndarray) -> bytes:
        return (sv > 0).astype(np.uint8).tobytes()

    best_e = energy
    best_s = s.copy()
    best_key = key(s)
    for k in range(1, 1 << n):
        b = (k & -k).bit_length() - 1  # Gray code: flip the lowest set bit's spin
        energy += 2.0 * s[b] * (f[b] + h[b])
        f += (-2.0 * s[b]) * J[:, b]
        s[b] = -s[b]
        if energy < best_e:
            best_e = energy
            best_s = s.copy()
            best_key = key(s)
        elif energy == best_e:
            kk = key(s)
            if kk < best_key:
                best_s = s.copy()
                best_key = kk
    if instance.field is None and key(-best_s) < best_key:
        best_s = -best_s  # global-flip degeneracy: exact tie, smaller vector wins
    exact = -0.5 * float(best_s @ (J @ best_s)) - float(h @ best_s)
    return best_s, exact


# --------------------------------------------------------------------------
# bench specification and report
# --------------------------------------------------------------------------


@dataclass
class SolverSetup:
    name: str
    label: str = ""
    eta: float = 1.0
    lookback_q: int = 5
    knobs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in SOLVER_NAMES:
            raise ValueError(f"unknown solver {self.name!r}")
        if not self.label:
            self.label = self.name


@dataclass
class BenchSpec:
    instance: Union[str, ProblemInstance]
    solvers: Sequence[SolverSetup]
    restarts: int = 1
    budget_iters: Optional[int] = None
    budget_seconds: Optional[float] = None
    reference: Union[str, float, None] = "brute_force"  # or "long_sa" / fixed energy
    tts_fraction: float = 0.99
    seed: int = 0
    trace_stride: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not (0 < self.tts_fraction <= 1):
            raise ValueError("tts_fraction must lie in (0, 1]")
        if self.budget_iters is None and self.budget_seconds is None:
            raise ValueError("one of budget_iters or budget_seconds is required")


@dataclass
class SolverReport:
    solver: str
    label: str
    runs: int
    best_energy: float
    mean_energy: float
    energies: list[float]
    best_cut: Optional[float]
    histogram_edges: list[float]
    histogram_counts: list[int]
    avg_tts: Optional[float]
    tts_reached: int
    attainment_rate: Optional[float]
    mean_iterations: float
    mean_sweeps: Optional[float] = None  # flip attempts / n, single-flip solvers only


@dataclass
class BenchReport:
    instance_name: str
    n: int
    reference_kind: Optional[str]
    reference_energy: Optional[float]
    tts_fraction: float
    solvers: list[SolverReport]
    environment: dict
    traces: dict = field(default_factory=dict)  # label -> list of run traces


def load_bench_spec(path: Union[str, Path]) -> BenchSpec:
    """Read a declarative bench spec (JSON)."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    inst = d["instance"]
    if isinstance(inst, str) and not os.path.isabs(inst):
        inst = str(path.parent / inst)
    solvers = [
        SolverSetup(
            name=s["name"],
            label=s.get("label", ""),
            eta=s.get("eta", 1.0),
            lookback_q=s.get("q", s.get("lookback_q", 5)),
            knobs=s.get("knobs", {}),
        )
        for s in d["solvers"]
    ]
    return BenchSpec(
        instance=inst,
        solvers=solvers,
        restarts=d.get("restarts", 1),
        budget_iters=d.get("budget_iters"),
        budget_seconds=d.get("budget_seconds"),
        reference=d.get("reference", "brute_force"),
        tts_fraction=d.get("tts_fraction", 0.99),
        seed=d.get("seed", 0),
        trace_stride=d.get("trace_stride"),
        workers=d.get("workers", 1),
    )


def freedman_diaconis_bins(data: np.ndarray, floor: int = 10) -> int:
    data = np.asarray(data, dtype=np.float64)
    if data.size < 2 or np.ptp(data) == 0:
        return floor
    iqr = float(np.subtract(*np.percentile(data, [75, 25])))
    if iqr == 0:
        return floor
    width = 2.0 * iqr / data.size ** (1.0 / 3.0)
    return max(floor, int(math.ceil(np.ptp(data) / width)))


def _resolve_reference(spec: BenchSpec, instance: ProblemInstance):
    ref = spec.reference
    if ref is None:
        return None, None
    if isinstance(ref, (int, float)):
        return "fixed", float(ref)
    if ref == "brute_force":
        _, e = brute_force_ground_state(instance)
        return "brute_force", e
    if ref == "long_sa":
        best = np.inf
        for r in range(spec.restarts):
            res = sa_solve(
                instance, seed=spec.seed + 10_000 + r, steps=LONG_SA_STEPS,
                trace_stride=LONG_SA_STEPS,
            )
            best = min(best, res.energy)
        return "long_sa", float(best)
    raise ValueError(f"unknown reference {ref!r}")


def first_reach_time(
    trace: Sequence[TraceRecord], threshold: float, use_cut: bool
) -> Optional[float]:
    """Earliest elapsed time at which the best-so-far quality meets the
    threshold (quality = cut value if available, else -energy)."""
    for rec in trace:
        if use_cut and rec.cut_value is not None:
            quality = rec.cut_value + (rec.energy - rec.best_energy)  # best cut so far
        else:
            quality = -rec.best_energy
        if quality >= threshold:
            return rec.elapsed_s
    return None


_WORKER_CTX: dict = {}


def _init_worker(instance, common):
    _WORKER_CTX["instance"] = instance
    _WORKER_CTX["common"] = common


def _bench_one(task):
    setup_dict, run_idx, seed, params = task
    instance = _WORKER_CTX["instance"]
    common = _WORKER_CTX["common"]
    setup = SolverSetup(**setup_dict)
    res = solve(
        instance,
        setup.name,
        seed=seed,
        eta=setup.eta,
        lookback_q=setup.lookback_q,
        budget_iters=common["budget_iters"],
        budget_seconds=common["budget_seconds"],
        trace_stride=common["trace_stride"],
        params=params,
        **setup.knobs,
    )
    return setup.label, run_idx, res.energy, res.iterations, res.trace


def run_bench(spec: BenchSpec) -> BenchReport:
    """Execute the bench spec and aggregate a report.

    Restarts are independent and may run on parallel workers; each run is
    internally deterministic given its seed. Wall-clock timing starts inside
    each solver, after instance loading.
    """
    instance = (
        dio.load_instance(spec.instance) if isinstance(spec.instance, (str, Path)) else spec.instance
    )
    ref_kind, ref_energy = _resolve_reference(spec, instance)
    use_cut = instance.cut_offset is not None
    if ref_energy is not None:
        ref_quality = (
            instance.cut_offset - ref_energy if use_cut else -ref_energy
        )
        threshold = spec.tts_fraction * ref_quality
    else:
        threshold = None

    common = {
        "budget_iters": spec.budget_iters,
        "budget_seconds": spec.budget_seconds,
        "trace_stride": spec.trace_stride,
    }
    # alpha/beta are per-instance quantities: derive them once per setup here
    # rather than inside every restart (spectral estimation dominates
    # otherwise, and it is setup work, not solve time)
    from .model import homogenized_instance
    from .spectral import derive_params

    hom = homogenized_instance(instance)
    premade = {}
    for setup in spec.solvers:
        if setup.name in ("doch", "adoch"):
            key = (setup.eta, setup.lookback_q)
            if key not in premade:
                premade[key] = derive_params(
                    hom.coupling,
                    eta=setup.eta,
                    lookback_q=setup.lookback_q,
                    max_iters=spec.budget_iters if spec.budget_iters else 10**9,
                    time_budget=spec.budget_seconds,
                    tol=1e-8,
                )
    tasks = [
        (
            asdict(setup),
            r,
            spec.seed + r,
            premade.get((setup.eta, setup.lookback_q)) if setup.name in ("doch", "adoch") else None,
        )
        for setup in spec.solvers
        for r in range(spec.restarts)
    ]
    results = {}
    if spec.workers > 1:
        with ProcessPoolExecutor(
            max_workers=spec.workers, initializer=_init_worker, initargs=(instance, common)
        ) as pool:
            for label, r, energy, iters, trace in pool.map(_bench_one, tasks):
                results[(label, r)] = (energy, iters, trace)
    else:
        _init_worker(instance, common)
        for task in tasks:
            label, r, energy, iters, trace = _bench_one(task)
            results[(label, r)] = (energy, iters, trace)

    reports = []
    traces = {}
    for setup in spec.solvers:
        runs = [results[(setup.label, r)] for r in range(spec.restarts)]
        energies = np.array([e for e, _, _ in runs])
        iterations = np.array([it for _, it, _ in runs], dtype=np.float64)
        run_traces = [t for _, _, t in runs]
        traces[setup.label] = run_traces
        bins = freedman_diaconis_bins(energies)
        lo, hi = float(energies.min()), float(energies.max())
        if hi - lo <= 1e-9 * max(1.0, abs(lo), abs(hi)):
            pad = max(0.5, 1e-9 * abs(lo))
            lo, hi = lo - pad, hi + pad
        counts, edges = np.histogram(energies, bins=bins, range=(lo, hi))
        tts_times = []
        reached = 0
        if threshold is not None:
            for t in run_traces:
                ft = first_reach_time(t, threshold, use_cut)
                if ft is not None:
                    reached += 1
                    tts_times.append(ft)
        attainment = None
        if ref_energy is not None:
            attainment = float(np.mean(energies <= ref_energy + 1e-9))
        reports.append(
            SolverReport(
                solver=setup.name,
                label=setup.label,
                runs=spec.restarts,
                best_energy=float(energies.min()),
                mean_energy=float(energies.mean()),
                energies=[float(e) for e in energies],
                best_cut=(
                    instance.cut_offset - float(energies.min()) if use_cut else None
                ),
                histogram_edges=[float(e) for e in edges],
                histogram_counts=[int(c) for c in counts],
                avg_tts=float(np.mean(tts_times)) if tts_times else None,
                tts_reached=reached,
                attainment_rate=attainment,
                mean_iterations=float(iterations.mean()),
                mean_sweeps=(
                    float(iterations.mean() / instance.n) if setup.name == "sa" else None
                ),
            )
        )

    return BenchReport(
        instance_name=instance.name or "instance",
        n=instance.n,
        reference_kind=ref_kind,
        reference_energy=ref_energy,
        tts_fraction=spec.tts_fraction,
        solvers=reports,
        environment=environment_metadata(),
        traces=traces,
    )


def environment_metadata() -> dict:
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "cpu_count": os.cpu_count(),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


# --------------------------------------------------------------------------
# report output
# --------------------------------------------------------------------------


def write_report_json(report: BenchReport, sink) -> None:
    d = {
        "instance": report.instance_name,
        "n": report.n,
        "reference_kind": report.reference_kind,
        "reference_energy": report.reference_energy,
        "tts_fraction": report.tts_fraction,
        "solvers": [asdict(s) for s in report.solvers],
        "environment": report.environment,
    }
    own, fh = dio._open(sink, "w")
    try:
        json.dump(d, fh, indent=2)
        fh.write("\n")
    finally:
        if own:
            fh.close()


def write_summary_csv(report: BenchReport, sink) -> None:
    own, fh = dio._open(sink, "w")
    try:
        fh.write(
            "solver,label,runs,best_energy,mean_energy,best_cut,avg_tts,"
            "tts_reached,attainment_rate,mean_iterations,mean_sweeps\n"
        )
        for s in report.solvers:
            fields = [
                s.solver, s.label, str(s.runs),
                f"{s.best_energy:.17g}", f"{s.mean_energy:.17g}",
                "" if s.best_cut is None else f"{s.best_cut:.17g}",
                "" if s.avg_tts is None else f"{s.avg_tts:.17g}",
                str(s.tts_reached),
                "" if s.attainment_rate is None else f"{s.attainment_rate:.17g}",
                f"{s.mean_iterations:.17g}",
                "" if s.mean_sweeps is None else f"{s.mean_sweeps:.17g}",
            ]
            fh.write(",".join(fields) + "\n")
    finally:
        if own:
            fh.close()


def write_runs_csv(report: BenchReport, sink) -> None:
    """Plot-ready long format: one row per trace record."""
    own, fh = dio._open(sink, "w")
    try:
        fh.write("solver,run,iter,elapsed_s,energy\n")
        for label, run_traces in report.traces.items():
            for r, trace in enumerate(run_traces):
                for rec in trace:
                    fh.write(
                        f"{label},{r},{rec.iteration},{rec.elapsed_s:.17g},{rec.energy:.17g}\n"
                    )
    finally:
        if own:
            fh.close()


def format_summary_table(report: BenchReport) -> str:
    lines = [
        f"instance: {report.instance_name} (n={report.n})",
        f"reference: {report.reference_kind} "
        + (f"energy={report.reference_energy:.6g}" if report.reference_energy is not None else ""),
        f"{'solver':<10} {'best_E':>14} {'mean_E':>14} {'avg_tts_s':>10} {'reached':>8} {'attain':>7}",
    ]
    for s in report.solvers:
        tts = f"{s.avg_tts:.4f}" if s.avg_tts is not None else "n/a"
        att = f"{s.attainment_rate:.2f}" if s.attainment_rate is not None else "n/a"
        reached = f"{s.tts_reached:>5}/{s.runs:<2}" if report.reference_kind else "    n/a "
        lines.append(
            f"{s.label:<10} {s.best_energy:>14.6g} {s.mean_energy:>14.6g} "
            f"{tts:>10} {reached} {att:>7}"
        )
    return "\n".join(lines)
