"""Spectral estimation and derivation of the solver parameters alpha and beta.

``alpha = eta * lambda_max(-J)`` makes the quadratic part of the Hamiltonian
convex (for eta >= 1), and ``beta = n * sqrt(n) * ||J + alpha I||_inf`` keeps
the iterates bounded for any alpha. The dominant eigenvalue is obtained by
power iteration for moderate sizes and by the Wigner semicircle estimate
``2 <J> sqrt(n)`` (with <J> the off-diagonal sample standard deviation) for
n >= 10^4, where exact estimation gets expensive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import matvec as mv
from .coupling import CouplingMatrix, ProceduralCoupling

WIGNER_SIZE_THRESHOLD = 10_000


@dataclass
class SolverParams:
    """Parameters for the fixed-point solvers.

    ``lookback_q`` is the acceptance-window depth of the accelerated variant;
    plain fixed-point runs ignore it.
    """

    alpha: float
    beta: float
    eta: float = 1.0
    lookback_q: int = 5
    max_iters: int = 1000
    time_budget: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if not (0 < self.eta <= 2):
            raise ValueError("eta must lie in (0, 2]")
        if self.lookback_q < 1:
            raise ValueError("lookback_q must be >= 1")


@dataclass
class SpectralEstimate:
    lambda_max_negJ: float
    method: str  # "power_iteration" or "wigner"
    iterations_used: int = 0
    sample_variance: Optional[float] = None


def _power_core(
    apply_m: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float,
    max_iters: int,
    seed: int = 0,
) -> tuple[float, float, int, bool]:
    """Power iteration returning (|lambda| estimate, Rayleigh quotient,
    iterations, converged).

    Starts from the normalized all-ones vector for reproducibility; if the
    relative Rayleigh residual stalls, one seeded random restart is taken.
    """
    v = np.full(n, 1.0 / np.sqrt(n))
    restarted = False
    best_resid = np.inf
    since_improve = 0
    mag = 0.0
    rayleigh = 0.0
    k = 0
    while k < max_iters:
        w = apply_m(v)
        mag = float(np.linalg.norm(w))
        if mag == 0.0:
            if restarted:
                return 0.0, 0.0, k, False
            rng = np.random.default_rng(seed)
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            restarted = True
            k += 1
            continue
        rayleigh = float(v @ w)
        resid = float(np.linalg.norm(w - rayleigh * v)) / mag
        if resid <= tol:
            return mag, rayleigh, k + 1, True
        if resid < 0.999 * best_resid:
            best_resid = resid
            since_improve = 0
        else:
            since_improve += 1
            if since_improve > 50 and not restarted:
                rng = np.random.default_rng(seed)
                v = rng.standard_normal(n)
                v /= np.linalg.norm(v)
                restarted = True
                since_improve = 0
                k += 1
                continue
        v = w / mag
        k += 1
    return mag, rayleigh, k, False


def _apply_for(M) -> tuple[Callable[[np.ndarray], np.ndarray], int]:
    if isinstance(M, CouplingMatrix):
        return (lambda v: mv.matvec(M, v)), M.n
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square matrix or CouplingMatrix")
    return (lambda v: arr @ v), arr.shape[0]


def power_method_lambda_max(M, tol: float = 1e-10, max_iters: int = 20_000) -> float:
    """Dominant eigenvalue magnitude of a symmetric operator.

    Accepts a square ndarray or a CouplingMatrix. On non-convergence the best
    estimate is returned with a warning (the estimate approaches the true
    value from below).
    """
    apply_m, n = _apply_for(M)
    mag, _, iters, converged = _power_core(apply_m, n, tol, max_iters)
    if mag == 0.0:
        raise ValueError("power iteration needs at least one nonzero entry")
    if not converged:
        warnings.warn(
            f"power iteration did not reach tol={tol} in {iters} iterations; "
            "returning best estimate",
            RuntimeWarning,
        )
    return mag


def power_lambda_max_neg(
    J: CouplingMatrix, tol: float = 1e-10, max_iters: int = 20_000
) -> SpectralEstimate:
    """lambda_max(-J) by power iteration.

    Stage one estimates the dominant magnitude rho of -J; stage two runs on
    the shifted operator -J + rho I (all eigenvalues nonnegative, dominant
    one equal to lambda_max(-J) + rho) to resolve the sign.
    """
    apply_neg = lambda v: -mv.matvec(J, v)
    rho, _, it1, _ = _power_core(apply_neg, J.n, tol, max_iters)
    if rho == 0.0:
        raise ValueError("coupling matrix must have at least one nonzero entry")
    apply_shift = lambda v: rho * v - mv.matvec(J, v)
    dom, _, it2, converged = _power_core(apply_shift, J.n, tol, max_iters)
    if not converged:
        warnings.warn("shifted power iteration did not converge; using best estimate", RuntimeWarning)
    return SpectralEstimate(
        lambda_max_negJ=dom - rho, method="power_iteration", iterations_used=it1 + it2
    )


def offdiag_mean_std(J: CouplingMatrix) -> tuple[float, float]:
    """Mean and standard deviation over all n(n-1) off-diagonal entries
    (structural zeros of sparse storage included)."""
    s1, s2 = J.offdiag_moments()
    count = J.n * (J.n - 1)
    mean = s1 / count
    var = max(s2 / count - mean * mean, 0.0)
    return mean, float(np.sqrt(var))


def wigner_lambda_max(J: CouplingMatrix) -> float:
    """Semicircle-law estimate ``2 <J> sqrt(n)`` of the dominant eigenvalue.

    <J> is the off-diagonal sample standard deviation. For zero-diagonal
    couplings with i.i.d.-like entries the spectrum is symmetric, so the same
    number estimates lambda_max(-J). A constant off-diagonal matrix has zero
    variance and yields 0 (callers fall back to power iteration).
    """
    if J.n < 2:
        raise ValueError("need n >= 2")
    s1, s2 = J.offdiag_moments()
    if s2 == 0.0:
        raise ValueError("degenerate all-zero coupling matrix")
    _, std = offdiag_mean_std(J)
    return 2.0 * std * float(np.sqrt(J.n))


def estimate_lambda_max_neg(
    J: CouplingMatrix,
    method: str = "auto",
    tol: float = 1e-10,
    max_iters: int = 20_000,
) -> SpectralEstimate:
    """Estimate lambda_max(-J), selecting the method by problem size.

    ``auto`` uses power iteration below n = 10^4 and the Wigner estimate at
    or above it. Formula-defined (procedural) matrices always default to the
    Wigner estimate: their moments cost one streaming pass, while every
    power-iteration step would regenerate the full matrix. A degenerate
    (nonpositive) Wigner estimate falls back to power iteration.
    """
    if method not in ("auto", "power_iteration", "wigner"):
        raise ValueError(f"unknown spectral method {method!r}")
    if method == "auto":
        if isinstance(J, ProceduralCoupling):
            method = "wigner"
        else:
            method = "power_iteration" if J.n < WIGNER_SIZE_THRESHOLD else "wigner"
    if method == "wigner":
        est = wigner_lambda_max(J)
        if est > 0:
            _, std = offdiag_mean_std(J)
            return SpectralEstimate(
                lambda_max_negJ=est, method="wigner", sample_variance=std * std
            )
        method = "power_iteration"
    return power_lambda_max_neg(J, tol=tol, max_iters=max_iters)


def derive_params(
    J: CouplingMatrix,
    eta: float = 1.0,
    method: str = "auto",
    lookback_q: int = 5,
    max_iters: int = 1000,
    time_budget: Optional[float] = None,
    seed: int = 0,
    tol: float = 1e-10,
    power_iters: int = 20_000,
) -> SolverParams:
    """Derive (alpha, beta) from the coupling matrix.

    ``alpha = eta * lambda_max(-J)`` and
    ``beta = n sqrt(n) * max_i (alpha + sum_{j != i} |J_ij|)``, i.e.
    ``beta = n sqrt(n) * ||J + alpha I||_inf``.
    """
    if not (0 < eta <= 2):
        raise ValueError("eta must lie in (0, 2]")
    est = estimate_lambda_max_neg(J, method=method, tol=tol, max_iters=power_iters)
    if est.lambda_max_negJ <= 0:
        raise ValueError("spectral estimate is nonpositive; cannot derive alpha")
    alpha = eta * est.lambda_max_negJ
    beta = J.n * np.sqrt(J.n) * (alpha + float(J.abs_row_sums().max()))
    return SolverParams(
        alpha=float(alpha),
        beta=float(beta),
        eta=eta,
        lookback_q=lookback_q,
        max_iters=max_iters,
        time_budget=time_budget,
        seed=seed,
    )


def tune_eta(
    instance,
    candidate_etas: Sequence[float],
    probe_iters: int = 10,
    seed: int = 0,
    method: str = "auto",
    tol: float = 1e-8,
) -> float:
    """Pick eta by short probe runs: the candidate whose probe reaches the
    lowest Ising energy wins; ties break toward the smaller eta.
    """
    from .solvers.doch import doch_solve  # deferred: solvers depend on SolverParams

    if not candidate_etas:
        raise ValueError("candidate eta list is empty")
    if probe_iters < 1:
        raise ValueError("probe_iters must be >= 1")
    from .model import homogenized_instance

    inst = homogenized_instance(instance)
    try:
        est = estimate_lambda_max_neg(inst.coupling, method=method, tol=tol)
    except ValueError:
        return float(min(candidate_etas))  # degenerate matrix: every probe ties
    row_max = float(inst.coupling.abs_row_sums().max())
    n = inst.coupling.n
    best_eta = None
    best_energy = np.inf
    for eta in sorted(candidate_etas):
        alpha = eta * est.lambda_max_negJ
        beta = n * np.sqrt(n) * (alpha + row_max)
        params = SolverParams(
            alpha=alpha, beta=beta, eta=eta, max_iters=probe_iters, seed=seed
        )
        result = doch_solve(inst, params, trace_stride=max(probe_iters, 1))
        final_energy = result.trace[-1].energy
        if final_energy < best_energy:
            best_energy = final_energy
            best_eta = eta
    return float(best_eta)


DEFAULT_ETA_GRID = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0)
