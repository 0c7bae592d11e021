"""Command-line interface: gen / solve / bench / convert / oracle.

Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench as dbench
from . import io as dio
from . import matvec as mv
from .generate import GENERATOR_KINDS, GeneratorSpec, generate
from .solvers import SOLVER_NAMES, solve


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage errors are 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dcising", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("gen", help="generate a benchmark instance file")
    p_gen.add_argument("--kind", required=True, choices=GENERATOR_KINDS)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--p", type=float, default=None, help="connectivity percent (sparse_9bit)")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)

    p_solve = sub.add_parser("solve", help="run one solver on an instance")
    p_solve.add_argument("--instance", required=True)
    p_solve.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--eta", type=float, default=1.0)
    p_solve.add_argument("--q", type=int, default=5, help="look-back window depth")
    p_solve.add_argument("--budget-iters", type=int, default=None)
    p_solve.add_argument("--budget-seconds", type=float, default=None)
    p_solve.add_argument("--trace-out", default=None)
    p_solve.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p_solve.add_argument("--trace-stride", type=int, default=None)
    p_solve.add_argument("--workers", type=int, default=None)
    p_solve.add_argument("--block-size", type=int, default=None)

    p_bench = sub.add_parser("bench", help="run a bench spec file")
    p_bench.add_argument("--spec", required=True)
    p_bench.add_argument("--out-dir", required=True)
    p_bench.add_argument("--workers", type=int, default=None)
    p_bench.add_argument("--block-size", type=int, default=None)

    p_conv = sub.add_parser("convert", help="convert between edge-list graphs and CSR instances")
    p_conv.add_argument("--infile", required=True)
    p_conv.add_argument("--out", required=True)

    p_oracle = sub.add_parser("oracle", help="exact ground state by brute force (n <= 24)")
    p_oracle.add_argument("--instance", required=True)

    return parser


def _cmd_gen(args) -> int:
    spec = GeneratorSpec(kind=args.kind, n=args.n, seed=args.seed, connectivity_pct=args.p)
    out = Path(args.out)
    if args.kind == "procedural_sin" or out.suffix == ".json":
        dio.save_genspec(spec, out)
    else:
        dio.csr_save(generate(spec), out)
    print(f"wrote {out}")
    return 0


def _cmd_solve(args) -> int:
    if args.workers or args.block_size:
        mv.configure(workers=args.workers, block_size=args.block_size)
    instance = dio.load_instance(args.instance)
    result = solve(
        instance,
        args.solver,
        seed=args.seed,
        eta=args.eta,
        lookback_q=args.q,
        budget_iters=args.budget_iters,
        budget_seconds=args.budget_seconds,
        trace_stride=args.trace_stride,
    )
    cut = instance.cut_value_of(result.energy)
    cut_msg = "" if cut is None else f" best_cut={cut:.17g}"
    print(
        f"solver={result.solver} instance={instance.name or args.instance} "
        f"best_energy={result.energy:.17g}{cut_msg} iterations={result.iterations} "
        f"stop={result.stop_reason}"
    )
    if args.trace_out:
        dio.write_trace(result.trace, args.trace_out, fmt=args.format)
        print(f"trace written to {args.trace_out}")
    return 0


def _cmd_bench(args) -> int:
    spec = dbench.load_bench_spec(args.spec)
    if args.workers:
        spec.workers = args.workers
        mv.configure(workers=args.workers)
    if args.block_size:
        mv.configure(block_size=args.block_size)
    report = dbench.run_bench(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dbench.write_report_json(report, out_dir / "report.json")
    dbench.write_summary_csv(report, out_dir / "summary.csv")
    dbench.write_runs_csv(report, out_dir / "runs.csv")
    print(dbench.format_summary_table(report))
    print(f"report written to {out_dir}")
    return 0


def _cmd_convert(args) -> int:
    src = Path(args.infile)
    out = Path(args.out)
    if out.suffix == ".icsr":
        instance = dio.load_instance(src)
        dio.csr_save(dio.coupling_to_csr(instance.coupling), out)
    else:
        coupling = dio.csr_load(src)
        # instance couplings are J = -(1/2) W; write back the graph weights
        w = -2.0 * coupling.values
        lines = []
        edges = []
        rows = np.repeat(np.arange(coupling.n), np.diff(coupling.row_offsets))
        for r, c, v in zip(rows, coupling.col_indices, w):
            if r < c:
                edges.append((int(r) + 1, int(c) + 1, float(v)))
        lines.append(f"{coupling.n} {len(edges)}")
        for i, j, v in edges:
            sv = f"{int(v)}" if float(v).is_integer() else f"{v:.17g}"
            lines.append(f"{i} {j} {sv}")
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


def _cmd_oracle(args) -> int:
    instance = dio.load_instance(args.instance)
    spins, energy = dbench.brute_force_ground_state(instance)
    cut = instance.cut_value_of(energy)
    print(f"energy {energy:.17g}")
    if cut is not None:
        print(f"cut {cut:.17g}")
    print("spins " + " ".join("+1" if s > 0 else "-1" for s in spins))
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "convert": _cmd_convert,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (  # runtime failures: bad files, invalid models, solver errors
        OSError,
        ValueError,
        RuntimeError,
        KeyError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
