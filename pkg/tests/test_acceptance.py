"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
appear; without ``-s`` they show up in captured output. The desk-scale
solver shootout (criterion 10) runs six solvers x ten restarts x ten
seconds and dominates the suite's runtime.
"""

import time

import numpy as np
import pytest

import dcising as dc
from dcising.bench import BenchSpec, SolverSetup, brute_force_ground_state, format_summary_table, run_bench
from dcising.coupling import DenseCoupling
from dcising.generate import gen_dense_pm1, gen_procedural_sin, gen_sk, gen_sparse_9bit
from dcising.model import spins_from
from dcising.solvers import (
    HamiltonianView,
    adoch_solve,
    apply_T,
    doch_solve,
    hamiltonian,
    hamiltonian_gradient,
    jacobian_norm_at,
    sa_solve,
)
from dcising.solvers.baselines import SAParams, derive_c0
from dcising.spectral import SolverParams, derive_params, power_lambda_max_neg, tune_eta


def report(num: int, ok: bool, detail: str) -> None:
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {detail}", flush=True)
    assert ok, f"criterion {num}: {detail}"


def mixed_instances(count: int, sizes=(20, 100, 200), base_seed=0):
    out = []
    for k in range(count):
        n = sizes[k % len(sizes)]
        seed = base_seed + k
        if k % 2 == 0:
            J = gen_sk(n, seed=seed)
        else:
            J = gen_sparse_9bit(n, 50.0, seed=seed)
        out.append(dc.ProblemInstance(coupling=J, name=f"mix{k}"))
    return out


def test_criterion_01_monotone_descent():
    t0 = time.perf_counter()
    worst = -np.inf
    checked = 0
    for inst in mixed_instances(50):
        n = inst.n
        p = derive_params(inst.coupling, eta=1.0, max_iters=150, seed=checked, tol=1e-8)
        mu = float(np.linalg.eigvalsh(inst.coupling.to_dense() + p.alpha * np.eye(n)).min())
        r = doch_solve(inst, p, record_states=True, trace_stride=1000)
        for k in range(len(r.h_values) - 1):
            drop = r.h_values[k] - r.h_values[k + 1]
            need = 0.5 * mu * float(np.sum((r.states[k + 1] - r.states[k]) ** 2))
            worst = max(worst, need - drop)
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 60.0
    report(
        1,
        ok,
        f"descent inequality on {checked} iterations over 50 instances; "
        f"worst violation {worst:.3e} (tol 1e-9), runtime {elapsed:.1f}s (< 60s)",
    )


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_criterion_02_boundedness_rule():
    worst_excess = -np.inf
    runs = 0
    for idx, inst in enumerate(mixed_instances(50)):
        lam = power_lambda_max_neg(inst.coupling, tol=1e-8).lambda_max_negJ
        inf_base = float(inst.coupling.abs_row_sums().max())
        for scale in (0.1, 1.0, 10.0):
            alpha = scale * lam
            beta = alpha + inf_base  # exactly the smallest beta the rule allows
            p = SolverParams(alpha=alpha, beta=beta, max_iters=60, seed=idx)
            r = doch_solve(inst, p, record_states=True, trace_stride=1000)
            bound = max(1.0, float(np.abs(r.states[0]).max()))
            excess = max(float(np.abs(x).max()) for x in r.states) - bound
            worst_excess = max(worst_excess, excess)
            runs += 1
    ok = worst_excess <= 1e-12
    report(
        2,
        ok,
        f"|x|_inf stayed within max(1, |x0|_inf) on {runs} runs "
        f"(alpha scales 0.1/1/10, beta = |J+aI|_inf); worst excess {worst_excess:.2e}",
    )


def test_criterion_03_fixed_point_convergence():
    t0 = time.perf_counter()
    J = gen_sk(100, seed=0)
    inst = dc.ProblemInstance(coupling=J)
    lam = power_lambda_max_neg(J).lambda_max_negJ
    inf_base = float(np.abs(J.array).sum(axis=1).max())
    slowest = 0
    worst_fp = worst_grad = 0.0
    for alpha_ratio in (0.5, 1.5):
        alpha = alpha_ratio * lam
        for beta_ratio in (1.0, 5.0, 10.0):
            beta = beta_ratio * 100 * np.sqrt(100) * (alpha + inf_base)
            p = SolverParams(alpha=alpha, beta=beta, max_iters=500, seed=0)
            r = doch_solve(inst, p, record_states=True, trace_stride=1000)
            steps = [float(np.linalg.norm(b - a)) for a, b in zip(r.states, r.states[1:])]
            k = next((i + 1 for i, s in enumerate(steps) if s < 1e-6), None)
            slowest = max(slowest, k or 10**9)
            assert r.stop_reason == "converged"
            view = HamiltonianView(J, alpha, beta)
            worst_fp = max(worst_fp, float(np.max(np.abs(apply_T(view, r.x) - r.x))))
            worst_grad = max(worst_grad, float(np.max(np.abs(hamiltonian_gradient(view, r.x)))))
    elapsed = time.perf_counter() - t0
    ok = slowest <= 100 and worst_fp <= 1e-8 and worst_grad <= 1e-6
    report(
        3,
        ok,
        f"six hyperparameter combos on a 100-spin instance: step < 1e-6 within "
        f"{slowest} iterations (<= 100), |T(x*)-x*|_inf {worst_fp:.1e} (<= 1e-8), "
        f"|grad H|_inf {worst_grad:.1e} (<= 1e-6), runtime {elapsed:.1f}s",
    )


def test_criterion_04_jacobian_condition():
    t0 = time.perf_counter()
    below_one = 0
    runs = 0
    norms = []
    for iseed in range(10):
        J = gen_sk(100, seed=iseed)
        inst = dc.ProblemInstance(coupling=J)
        p0 = derive_params(J, eta=1.0, max_iters=500, tol=1e-8)
        for xseed in range(5):
            p = SolverParams(alpha=p0.alpha, beta=p0.beta, max_iters=500, seed=xseed)
            r = doch_solve(inst, p, trace_stride=1000)
            norm = jacobian_norm_at(HamiltonianView(J, p.alpha, p.beta), r.x)
            norms.append(norm)
            below_one += int(norm < 1.0)
            runs += 1
    elapsed = time.perf_counter() - t0
    ok = below_one >= int(np.ceil(0.95 * runs)) and elapsed < 60.0
    report(
        4,
        ok,
        f"fixed-point Jacobian norm < 1 on {below_one}/{runs} runs "
        f"(median {np.median(norms):.3f}), runtime {elapsed:.1f}s (< 60s)",
    )


def test_criterion_05_tiny_scale_optimality():
    t0 = time.perf_counter()
    hits = 0
    for iseed in range(50):
        J = gen_sk(12, seed=1000 + iseed)
        inst = dc.ProblemInstance(coupling=J)
        _, e_star = brute_force_ground_state(inst)
        p0 = derive_params(J, eta=1.0, max_iters=200, tol=1e-8)
        best = np.inf
        for s in range(20):
            p = SolverParams(alpha=p0.alpha, beta=p0.beta, max_iters=200, seed=s)
            best = min(best, adoch_solve(inst, p).energy)
        hits += int(best <= e_star + 1e-9)
    rate = hits / 50.0
    elapsed = time.perf_counter() - t0
    ok = rate >= 0.80 and elapsed < 120.0
    report(
        5,
        ok,
        f"best-of-20 accelerated runs attained the exact optimum on {hits}/50 "
        f"12-spin instances (rate {rate:.2f}, target 0.80), runtime {elapsed:.1f}s (< 120s)",
    )


def test_criterion_06_two_spin_reproduction():
    J = DenseCoupling(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    inst = dc.ProblemInstance(coupling=J)
    ground = {(1.0, -1.0), (-1.0, 1.0)}
    ok_runs = 0
    for seed in range(20):
        p = SolverParams(alpha=1.0, beta=2.0, max_iters=30, seed=seed)
        r = doch_solve(inst, p, record_states=True, trace_stride=1000)
        signs = [tuple(spins_from(x)) for x in r.states]
        hit = next((k for k, sg in enumerate(signs) if sg in ground), None)
        stable = hit is not None and all(sg == signs[hit] for sg in signs[hit:])
        ok_runs += int(hit is not None and hit <= 5 and stable)
    ok = ok_runs == 20
    report(
        6,
        ok,
        f"antiferromagnetic pair (alpha=1, beta=2): {ok_runs}/20 random starts "
        f"settled on a ground sign pattern within 5 iterations",
    )


def test_criterion_07_homogenization_exact():
    rng = np.random.default_rng(99)
    exact = 0
    for _ in range(50):
        n = int(rng.integers(4, 11))
        a = np.triu(rng.integers(-5, 6, size=(n, n)).astype(float), 1)
        J = DenseCoupling(a + a.T, validate=False)
        h = rng.integers(-5, 6, size=n).astype(float)
        hat = dc.homogenize(J, h)
        sigma, _ = brute_force_ground_state(dc.ProblemInstance(coupling=hat))
        s = dc.dehomogenize(sigma)
        _, e_star = brute_force_ground_state(dc.ProblemInstance(coupling=J, field=h))
        exact += int(dc.energy_with_field(J, h, s) == e_star)
    ok = exact == 50
    report(
        7,
        ok,
        f"dehomogenized ground states matched the direct optimum exactly on {exact}/50 "
        f"integer-valued field instances (n <= 10)",
    )


def test_criterion_08_generator_statistics():
    n, p = 2000, 1.0
    J = gen_sparse_9bit(n, p, seed=11)
    n_pairs = n * (n - 1) // 2
    rate = 1022.0 / 102300.0
    sd = np.sqrt(n_pairs * rate * (1 - rate))
    stored_pairs = J.nnz / 2
    density_ok = abs(stored_pairs - n_pairs * rate) <= 3.0 * sd
    range_ok = J.values.min() >= -510.0 and J.values.max() <= 511.0

    sk = gen_sk(1000, seed=0)
    off = sk.array[np.triu_indices(1000, 1)]
    var = float(np.var(off))
    var_ok = abs(var - 1.0) <= 3.0 * np.sqrt(2.0 / (off.size - 1))

    ok = density_ok and range_ok and var_ok
    report(
        8,
        ok,
        f"sparse-9bit density {stored_pairs:.0f} vs {n_pairs * rate:.0f} +- {3*sd:.0f} (3 sigma), "
        f"values in [{J.values.min():.0f}, {J.values.max():.0f}] (expect [-510, 511]); "
        f"SK off-diagonal variance {var:.4f} (3-sigma window around 1)",
    )


def test_criterion_09_blocked_matvec_equivalence():
    from dcising import matvec as mv

    n = 4096
    Jp = gen_procedural_sin(n, seed=100)
    ref = Jp.to_dense()
    v = np.random.default_rng(12).standard_normal(n)
    ref_y = ref @ v
    outs = {}
    for g in (1, 2, 4):
        plan = mv.BlockPlan(n=n, block=512, workers=g)
        outs[g] = mv.blocked_matvec(Jp, v, plan)
    max_err = max(float(np.max(np.abs(outs[g] - ref_y))) for g in outs)
    bitwise = outs[1].tobytes() == outs[2].tobytes() == outs[4].tobytes()
    ok = max_err <= 1e-9 and bitwise
    report(
        9,
        ok,
        f"blocked product vs dense reference on n=4096 formula couplings: "
        f"max abs err {max_err:.2e} (<= 1e-9); bitwise equal across 1/2/4 workers: {bitwise}",
    )


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # eta < 1: descent not guaranteed
def test_criterion_10_desk_scale_solver_ordering():
    t0 = time.perf_counter()
    W = gen_dense_pm1(2000, seed=20240817)
    J = dc.maxcut_to_ising(W)
    inst = dc.ProblemInstance(coupling=J, name="pm1-2000-maxcut")
    eta = tune_eta(
        inst, (0.05, 0.1, 0.15, 0.25, 0.5, 1.0), probe_iters=30, seed=0
    )
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
        restarts=10,
        budget_seconds=10.0,
        reference=None,
        tts_fraction=0.99,
        seed=0,
        trace_stride=10,
        workers=2,
    )
    rep = run_bench(spec)
    print()
    print(format_summary_table(rep))
    best = {s.label: s.best_energy for s in rep.solvers}
    ordering = {
        name: best["doch"] <= best[name] and best["adoch"] <= best[name]
        for name in ("sa", "bsb", "simcim", "sia")
    }
    elapsed = time.perf_counter() - t0
    ok = ordering["sa"]  # hard assertion against single-flip annealing only
    report(
        10,
        ok,
        f"n=2000 +-1 MAX-CUT couplings, 10 s x 10 restarts (tuned eta={eta}): "
        f"doch {best['doch']:.0f} / adoch {best['adoch']:.0f} vs sa {best['sa']:.0f}; "
        f"full ordering vs baselines {ordering} (hard assertion: sa only), "
        f"runtime {elapsed:.0f}s",
    )


def test_criterion_11_baseline_fidelity():
    t0 = time.perf_counter()
    hits = 0
    for iseed in range(20):
        J = gen_sk(12, seed=3000 + iseed)
        inst = dc.ProblemInstance(coupling=J)
        _, e_star = brute_force_ground_state(inst)
        r = sa_solve(inst, SAParams(steps=100_000), seed=iseed)
        hits += int(r.energy <= e_star + 1e-9)
    sa_ok = hits >= 18  # >= 90% of 20 instances

    c0 = derive_c0(gen_dense_pm1(2000, seed=7))
    c0_ok = abs(c0 - 0.0112) / 0.0112 <= 0.05
    elapsed = time.perf_counter() - t0
    ok = sa_ok and c0_ok
    report(
        11,
        ok,
        f"annealing with 1e5 flip attempts reached the optimum on {hits}/20 "
        f"12-spin instances (target 18); derived c0 = {c0:.5f} vs 0.0112 "
        f"(within 5%), runtime {elapsed:.0f}s",
    )


def test_criterion_12_gradient_check():
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(20):
        n = int(rng.integers(10, 40))
        J = gen_sk(n, seed=500 + k)
        if k % 2 == 0:
            view = HamiltonianView(J, alpha=1.0, beta=2.0)
            x = rng.uniform(-1.0, 1.0, n)
        else:
            p = derive_params(J, eta=1.0, tol=1e-8)
            view = HamiltonianView(J, p.alpha, p.beta)
            x = rng.uniform(-1.0, 1.0, n) * np.sqrt(p.alpha / p.beta)
        g = hamiltonian_gradient(view, x)
        eps = 1e-5
        fd = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = eps
            fd[i] = (hamiltonian(view, x + e) - hamiltonian(view, x - e)) / (2 * eps)
        rel = float(np.linalg.norm(g - fd) / np.linalg.norm(g))
        worst = max(worst, rel)
    ok = worst <= 1e-5
    report(
        12,
        ok,
        f"analytic gradient vs central differences (step 1e-5) on 20 "
        f"(instance, point) pairs: worst relative error {worst:.2e} (<= 1e-5)",
    )
