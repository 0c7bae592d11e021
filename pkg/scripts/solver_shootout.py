#!/usr/bin/env python3
"""Head-to-head solver comparison on a dense +-1 MAX-CUT instance.

Generates a fresh n-node graph with +-1 weights, converts it to couplings,
tunes eta by short probe runs, then gives every solver the same wall-clock
budget and restart count. Prints the summary table and optionally writes the
full report.

Example:
    python scripts/solver_shootout.py --n 2000 --budget-seconds 10 \
        --restarts 10 --workers 2 --out-dir results/k2000
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import dcising as dc
from dcising.bench import (
    BenchSpec,
    SolverSetup,
    format_summary_table,
    run_bench,
    write_report_json,
    write_runs_csv,
    write_summary_csv,
)
from dcising.generate import gen_dense_pm1
from dcising.spectral import tune_eta

ETA_CANDIDATES = (0.05, 0.1, 0.15, 0.25, 0.5, 1.0)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240817)
    ap.add_argument("--restarts", type=int, default=10)
    ap.add_argument("--budget-seconds", type=float, default=10.0)
    ap.add_argument("--budget-iters", type=int, default=None)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--probe-iters", type=int, default=30)
    ap.add_argument("--out-dir", default=None)
    args = ap.parse_args()

    W = gen_dense_pm1(args.n, seed=args.seed)
    inst = dc.ProblemInstance(
        coupling=dc.maxcut_to_ising(W), name=f"pm1-{args.n}-maxcut"
    )
    eta = tune_eta(inst, ETA_CANDIDATES, probe_iters=args.probe_iters, seed=0)
    print(f"tuned eta = {eta} (candidates {ETA_CANDIDATES})")

    spec = BenchSpec(
        instance=inst,
        solvers=[
            SolverSetup(name="doch", eta=eta),
            SolverSetup(name="adoch", eta=eta),
            SolverSetup(name="sa"),
            SolverSetup(name="bsb"),
            SolverSetup(name="simcim"),
            SolverSetup(name="sia"),
        ],
        restarts=args.restarts,
        budget_seconds=args.budget_seconds,
        budget_iters=args.budget_iters,
        reference=None,
        seed=args.seed,
        trace_stride=10,
        workers=args.workers,
    )
    report = run_bench(spec)
    print(format_summary_table(report))

    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_report_json(report, out / "report.json")
        write_summary_csv(report, out / "summary.csv")
        write_runs_csv(report, out / "runs.csv")
        print(f"report written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
