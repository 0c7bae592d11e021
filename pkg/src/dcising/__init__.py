"""Difference-of-convex Ising solvers with baselines, generators, and a bench harness."""

from .coupling import CouplingError, CouplingMatrix, CsrCoupling, DenseCoupling, ProceduralCoupling
from .generate import GeneratorSpec, gen_dense_pm1, gen_procedural_sin, gen_sk, gen_sparse_9bit
from .model import (
    BorderedCoupling,
    ProblemInstance,
    cut_value,
    dehomogenize,
    energy,
    energy_with_field,
    homogenize,
    homogenized_instance,
    maxcut_to_ising,
    spins_from,
)
from .spectral import (
    SolverParams,
    SpectralEstimate,
    derive_params,
    power_method_lambda_max,
    tune_eta,
    wigner_lambda_max,
)
from .solvers import (
    SOLVER_NAMES,
    HamiltonianView,
    SolveResult,
    TraceRecord,
    adoch_solve,
    apply_T,
    attractor,
    bsb_solve,
    doch_solve,
    hamiltonian,
    hamiltonian_gradient,
    jacobian_norm_at,
    sa_solve,
    sia_solve,
    simcim_solve,
    solve,
)
from .bench import BenchReport, BenchSpec, SolverSetup, brute_force_ground_state, run_bench

__version__ = "0.1.0"
