"""Fixed-point Ising solvers built on the difference-of-convex Hamiltonian.

The relaxed objective is ``H(x) = A(x) + E(x)`` with the quartic attractor
``A(x) = (beta/4) sum x_i^4 - (alpha/2) sum x_i^2`` and the relaxed energy
``E(x) = -(1/2) x.T J x``. Grouping the quadratic terms gives the convex
split ``H = f - g`` with ``f = (beta/4) sum x_i^4`` and
``g = (1/2) x.T (J + alpha I) x``. Linearizing g around the current iterate
and minimizing the resulting convex surrogate collapses to one application of

    T(x) = cbrt( (J + alpha I) x / beta )    (componentwise real cube root),

so each iteration costs a single matrix-vector multiplication. ``doch_solve``
iterates T directly (monotone descent when J + alpha I is positive
semidefinite); ``adoch_solve`` adds Nesterov-style extrapolation guarded by a
look-back acceptance window of depth q.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .. import matvec as mv
from ..coupling import CouplingMatrix
from ..model import ProblemInstance, spins_from
from ..spectral import SolverParams, _power_core
from .common import SolveResult, TraceCollector, TraceRecord, as_homogeneous

CONVERGENCE_TOL = 1e-10
DESCENT_WARN_TOL = 1e-9


@dataclass(frozen=True)
class HamiltonianView:
    """Coupling matrix with the attractor parameters alpha, beta."""

    coupling: CouplingMatrix
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")

    @classmethod
    def of(cls, instance_or_coupling, params: SolverParams) -> "HamiltonianView":
        J = getattr(instance_or_coupling, "coupling", instance_or_coupling)
        return cls(coupling=J, alpha=params.alpha, beta=params.beta)


def attractor(x: np.ndarray, alpha: float, beta: float) -> float:
    """Quartic potential ``(beta/4) sum x_i^4 - (alpha/2) sum x_i^2``.

    Its global minimizers are the hypercube vertices with coordinates
    ``+- sqrt(alpha/beta)``, each contributing ``-alpha^2 / (4 beta)``.
    """
    x = np.asarray(x, dtype=np.float64)
    x2 = x * x
    return 0.25 * beta * float(x2 @ x2) - 0.5 * alpha * float(x2.sum())


def _apply_A(view: HamiltonianView, x: np.ndarray) -> np.ndarray:
    """(J + alpha I) x, one matvec."""
    return mv.matvec(view.coupling, x) + view.alpha * x


def _hamiltonian_given(view: HamiltonianView, x: np.ndarray, Ax: np.ndarray) -> float:
    x2 = x * x
    return 0.25 * view.beta * float(x2 @ x2) - 0.5 * float(x @ Ax)


def hamiltonian(view: HamiltonianView, x: np.ndarray) -> float:
    """H(x) = f(x) - g(x); equal to attractor(x) + relaxed energy."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (view.coupling.n,):
        raise ValueError("dimension mismatch")
    return _hamiltonian_given(view, x, _apply_A(view, x))


def hamiltonian_gradient(view: HamiltonianView, x: np.ndarray) -> np.ndarray:
    """Component i equals ``beta x_i^3 - (J x)_i - alpha x_i``."""
    x = np.asarray(x, dtype=np.float64)
    return view.beta * x**3 - mv.matvec(view.coupling, x) - view.alpha * x


def _apply_T_given(view: HamiltonianView, Ax: np.ndarray) -> np.ndarray:
    return np.cbrt(Ax / view.beta)


def apply_T(view: HamiltonianView, x: np.ndarray) -> np.ndarray:
    """One fixed-point step ``cbrt((J + alpha I) x / beta)``.

    The cube root is the real (sign-preserving) branch, so T is odd and the
    spin symmetry x -> -x is preserved.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (view.coupling.n,):
        raise ValueError("dimension mismatch")
    return _apply_T_given(view, _apply_A(view, x))


def jacobian_norm_at(
    view: HamiltonianView, x_star: np.ndarray, tol: float = 1e-12, max_iters: int = 50_000
) -> float:
    """Spectral norm of the fixed-point Jacobian at x*.

    At a fixed point the Jacobian of T simplifies to
    ``(1 / (3 beta)) diag(x*)^{-2} (J + alpha I)``; a value below one marks
    the fixed point as a strict local minimizer. Computed by power iteration
    on M.T M, so it needs every component of x* nonzero.
    """
    x_star = np.asarray(x_star, dtype=np.float64)
    if np.any(x_star == 0.0):
        raise ValueError("Jacobian undefined: x* has a zero component")
    d2 = x_star**-2
    c = 1.0 / (3.0 * view.beta)

    # M = c * diag(d2) * A  =>  M.T M v = c^2 * A (d2^2 * (A v))
    def apply_sym(v):
        return c * c * _apply_A(view, (d2 * d2) * _apply_A(view, v))

    mag, _, _, converged = _power_core(apply_sym, view.coupling.n, tol, max_iters)
    if not converged:
        warnings.warn("Jacobian norm power iteration did not fully converge", RuntimeWarning)
    return float(np.sqrt(mag))


def initial_state(
    n: int, alpha: float, beta: float, rng: np.random.Generator
) -> np.ndarray:
    """Componentwise uniform on [-lambda, lambda] \\ {0}, lambda = sqrt(alpha/beta).

    Scale-matched to the attractor wells so the first step is well inside the
    basin structure.
    """
    lam = np.sqrt(alpha / beta)
    x = rng.uniform(-lam, lam, size=n)
    while np.any(x == 0.0):
        zeros = x == 0.0
        x[zeros] = rng.uniform(-lam, lam, size=int(zeros.sum()))
    return x


def _prepare(instance: ProblemInstance, params: SolverParams, x0):
    inst, unmap = as_homogeneous(instance)
    n = inst.coupling.n
    if x0 is None:
        rng = np.random.default_rng(params.seed)
        x = initial_state(n, params.alpha, params.beta, rng)
    else:
        x = np.array(x0, dtype=np.float64)
        if x.shape != (n,):
            raise ValueError(f"x0 has length {x.shape}, expected {n}")
        if not np.any(x != 0.0):
            raise ValueError("x0 must not be the zero vector")
    view = HamiltonianView(coupling=inst.coupling, alpha=params.alpha, beta=params.beta)
    return inst, unmap, view, x


def _eval_spins(J: CouplingMatrix, x: np.ndarray) -> tuple[np.ndarray, float]:
    s = spins_from(x)
    return s, mv.operator_energy(J, s)[1]


def doch_solve(
    instance: ProblemInstance,
    params: SolverParams,
    x0: Optional[np.ndarray] = None,
    callbacks: Iterable[Callable[[TraceRecord], None]] = (),
    trace_stride: int = 1,
    record_states: bool = False,
) -> SolveResult:
    """Plain fixed-point iteration ``x <- T(x)``.

    Runs until the step norm drops below 1e-10, the iteration budget is
    spent, or the time budget expires. The returned spin vector is the sign
    of the iterate with the lowest evaluated Ising energy (the trace records
    both current and best energy). A ``descent_violation`` event is emitted
    if the Hamiltonian ever increases by more than 1e-9, which cannot happen
    when J + alpha I is positive semidefinite.
    """
    inst, unmap, view, x = _prepare(instance, params, x0)
    collector = TraceCollector(instance, callbacks)
    warned = False

    Ax = _apply_A(view, x)
    h = _hamiltonian_given(view, x, Ax)
    h_values = [h]
    states = [x.copy()] if record_states else None
    s, e = _eval_spins(view.coupling, x)
    collector.record(0, s, e)

    k = 0
    stop_reason = "max_iters"
    while k < params.max_iters:
        x_new = _apply_T_given(view, Ax)
        step = float(np.max(np.abs(x_new - x)))
        x = x_new
        Ax = _apply_A(view, x)
        h_new = _hamiltonian_given(view, x, Ax)
        event = None
        if h_new - h > DESCENT_WARN_TOL:
            event = "descent_violation"
            if not warned:
                warnings.warn(
                    f"Hamiltonian increased by {h_new - h:.3e} at iteration {k + 1}",
                    RuntimeWarning,
                )
                warned = True
        h = h_new
        h_values.append(h)
        if record_states:
            states.append(x.copy())
        k += 1

        converged = step <= CONVERGENCE_TOL
        out_of_time = (
            params.time_budget is not None and collector.elapsed() >= params.time_budget
        )
        if k % trace_stride == 0 or converged or out_of_time or k == params.max_iters or event:
            s, e = _eval_spins(view.coupling, x)
            collector.record(k, s, e, event=event)
        if converged:
            stop_reason = "converged"
            break
        if out_of_time:
            stop_reason = "time_budget"
            break

    return SolveResult(
        solver="doch",
        spins=unmap(collector.best_spins),
        energy=collector.best_energy,
        iterations=k,
        stop_reason=stop_reason,
        trace=collector.trace,
        seed=params.seed,
        x=x,
        h_values=h_values,
        states=states,
    )


def adoch_solve(
    instance: ProblemInstance,
    params: SolverParams,
    x0: Optional[np.ndarray] = None,
    callbacks: Iterable[Callable[[TraceRecord], None]] = (),
    trace_stride: int = 1,
    record_states: bool = False,
    window_mode: str = "economy",
) -> SolveResult:
    """Accelerated fixed-point iteration with a look-back acceptance window.

    The extrapolation ``y_k = x_k + ((t_k - 1)/t_{k+1}) (x_k - x_{k-1})``
    (Nesterov scheme ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2``, t_0 = 1,
    starting at k >= 1) is accepted only if H(y_k) does not exceed the
    largest Hamiltonian value among the last q+1 iterates; otherwise the
    update falls back to x_k. Every acceptance decision is recorded in the
    trace and in ``result.accepted``.

    ``window_mode``:

    * ``"economy"`` (default) evaluates H(y_k) from cached products
      ``(J + alpha I) x`` of the last two iterates -- exact up to rounding,
      keeping the cost at one matrix-vector multiplication per iteration;
    * ``"exact"`` recomputes ``(J + alpha I) y_k`` directly, paying a second
      multiplication per iteration.
    """
    if window_mode not in ("economy", "exact"):
        raise ValueError("window_mode must be 'economy' or 'exact'")
    inst, unmap, view, x = _prepare(instance, params, x0)
    q = params.lookback_q
    collector = TraceCollector(instance, callbacks)

    Ax = _apply_A(view, x)
    h = _hamiltonian_given(view, x, Ax)
    window: deque[float] = deque([h], maxlen=q + 1)
    h_values = [h]
    states = [x.copy()] if record_states else None
    s, e = _eval_spins(view.coupling, x)
    collector.record(0, s, e)

    x_prev = x
    Ax_prev = Ax
    t_k = 1.0
    accepted: list[bool] = []
    k = 0
    stop_reason = "max_iters"
    while k < params.max_iters:
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        event = None
        if k >= 1:
            c = (t_k - 1.0) / t_next
            y = x + c * (x - x_prev)
            if window_mode == "economy":
                Ay = Ax + c * (Ax - Ax_prev)  # linearity: cached products suffice
            else:
                Ay = _apply_A(view, y)
            h_y = _hamiltonian_given(view, y, Ay)
            if h_y <= max(window):
                v, Av = y, Ay
                accepted.append(True)
                event = "momentum_accepted"
            else:
                v, Av = x, Ax
                accepted.append(False)
                event = "momentum_rejected"
        else:
            v, Av = x, Ax
            accepted.append(True)  # k = 0 has no extrapolation

        x_next = _apply_T_given(view, Av)
        step = float(np.max(np.abs(x_next - x)))
        x_prev, Ax_prev = x, Ax
        x = x_next
        Ax = _apply_A(view, x)
        h = _hamiltonian_given(view, x, Ax)
        window.append(h)
        h_values.append(h)
        if record_states:
            states.append(x.copy())
        t_k = t_next
        k += 1

        converged = step <= CONVERGENCE_TOL
        out_of_time = (
            params.time_budget is not None and collector.elapsed() >= params.time_budget
        )
        if k % trace_stride == 0 or converged or out_of_time or k == params.max_iters:
            s, e = _eval_spins(view.coupling, x)
            collector.record(k, s, e, event=event)
        if converged:
            stop_reason = "converged"
            break
        if out_of_time:
            stop_reason = "time_budget"
            break

    return SolveResult(
        solver="adoch",
        spins=unmap(collector.best_spins),
        energy=collector.best_energy,
        iterations=k,
        stop_reason=stop_reason,
        trace=collector.trace,
        seed=params.seed,
        x=x,
        h_values=h_values,
        accepted=accepted,
        states=states,
    )
