"""Shared solver plumbing: trace records, result container, best tracking.

Every solver is deterministic given (seed, params) and reports progress
through the same TraceRecord callback interface. Instances with an external
field are folded into one auxiliary spin before solving and the returned
spin vector is mapped back afterwards; energies are unchanged by that
reduction, so traces stay valid.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from ..model import ProblemInstance, dehomogenize, homogenized_instance


@dataclass
class TraceRecord:
    iteration: int
    elapsed_s: float
    energy: float
    best_energy: float
    cut_value: Optional[float] = None
    event: Optional[str] = None


@dataclass
class SolveResult:
    solver: str
    spins: np.ndarray  # spin vector with the lowest evaluated energy
    energy: float
    iterations: int
    stop_reason: str  # "converged", "max_iters" or "time_budget"
    trace: list[TraceRecord] = field(default_factory=list)
    seed: Optional[int] = None
    x: Optional[np.ndarray] = None  # final continuous state, when one exists
    h_values: Optional[list[float]] = None
    accepted: Optional[list[bool]] = None
    states: Optional[list[np.ndarray]] = None


class TraceCollector:
    """Tracks the best-so-far spin vector and emits TraceRecords.

    ``record`` must be called with an evaluated (spins, energy) pair; the
    collector never computes energies itself.
    """

    def __init__(
        self,
        instance: ProblemInstance,
        callbacks: Iterable[Callable[[TraceRecord], None]] = (),
        clock: Callable[[], float] = time.perf_counter,
    ):
        self._cut_offset = instance.cut_offset
        self._callbacks = tuple(callbacks)
        self._clock = clock
        self._t0 = clock()
        self.trace: list[TraceRecord] = []
        self.best_energy = np.inf
        self.best_spins: Optional[np.ndarray] = None

    def elapsed(self) -> float:
        return self._clock() - self._t0

    def observe(self, spins: np.ndarray, energy: float) -> None:
        if energy < self.best_energy:
            self.best_energy = energy
            self.best_spins = np.array(spins, copy=True)

    def record(
        self, iteration: int, spins: np.ndarray, energy: float, event: Optional[str] = None
    ) -> TraceRecord:
        self.observe(spins, energy)
        cut = None if self._cut_offset is None else self._cut_offset - energy
        rec = TraceRecord(
            iteration=iteration,
            elapsed_s=self.elapsed(),
            energy=energy,
            best_energy=self.best_energy,
            cut_value=cut,
            event=event,
        )
        self.trace.append(rec)
        for cb in self._callbacks:
            cb(rec)
        return rec


def as_homogeneous(
    instance: ProblemInstance,
) -> tuple[ProblemInstance, Callable[[np.ndarray], np.ndarray]]:
    """Return a field-free instance and the spin unmapping for results."""
    if instance.field is None:
        return instance, lambda s: s
    hom = homogenized_instance(instance)
    # cut bookkeeping carries over: graph instances never carry a field
    return hom, dehomogenize
