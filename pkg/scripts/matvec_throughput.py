#!/usr/bin/env python3
"""Measure blocked matrix-vector throughput across worker counts.

The blocked engine materializes formula-defined tiles on demand, so this is
the kernel that bounds solver speed on procedural instances. Scaling is
reported, not asserted: it depends on core count and on how much of the tile
work releases the interpreter lock.

Example:
    python scripts/matvec_throughput.py --n 4096 --block 512 --workers 1 2 4
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from dcising import matvec as mv
from dcising.generate import gen_procedural_sin


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--block", type=int, default=512)
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=100)
    args = ap.parse_args()

    J = gen_procedural_sin(args.n, seed=args.seed)
    v = np.random.default_rng(0).standard_normal(args.n)

    print(f"n={args.n} block={args.block} ({-(-args.n // args.block)}^2 tiles)")
    print(f"{'workers':>8} {'best_s':>10} {'Gentry/s':>10} {'speedup':>8}")
    base = None
    reference = None
    for g in args.workers:
        plan = mv.BlockPlan(n=args.n, block=args.block, workers=g)
        mv.blocked_matvec(J, v, plan)  # warm up
        best = min(
            _timed(lambda: mv.blocked_matvec(J, v, plan)) for _ in range(args.repeats)
        )
        out = mv.blocked_matvec(J, v, plan)
        if reference is None:
            reference = out.tobytes()
            base = best
        assert out.tobytes() == reference, "determinism contract violated"
        rate = args.n * args.n / best / 1e9
        print(f"{g:>8} {best:>10.3f} {rate:>10.2f} {base / best:>8.2f}x")
    print("outputs bitwise identical across worker counts: ok")
    return 0


def _timed(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


if __name__ == "__main__":
    sys.exit(main())
