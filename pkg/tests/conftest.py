"""Shared fixtures and independent test oracles."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import dcising as dc

settings.register_profile(
    "ci",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def naive_ground_state(J: np.ndarray, h: np.ndarray | None = None):
    """Second, independent enumeration oracle: evaluates every configuration
    from scratch (no incremental updates), vectorized over all 2^n states.

    Ties resolve to the lexicographically smallest spin vector (-1 < +1).
    """
    J = np.asarray(J, dtype=np.float64)
    n = J.shape[0]
    if n > 20:
        raise ValueError("naive oracle is for small n only")
    codes = np.arange(1 << n, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)
    spins = 2.0 * bits - 1.0  # bit 0 -> spin -1
    energies = -0.5 * np.einsum("ki,ij,kj->k", spins, J, spins)
    if h is not None:
        energies = energies - spins @ np.asarray(h, dtype=np.float64)
    best = energies.min()
    ties = np.nonzero(energies <= best + 0.0)[0]
    keys = [(spins[t] > 0).astype(np.uint8).tobytes() for t in ties]
    pick = ties[int(np.argmin(np.array(keys, dtype=object)))]
    return spins[pick], float(energies[pick])


def all_spin_vectors(n: int) -> np.ndarray:
    codes = np.arange(1 << n, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)
    return 2.0 * bits - 1.0


def random_symmetric_coupling(n: int, rng: np.random.Generator) -> dc.DenseCoupling:
    a = rng.standard_normal((n, n))
    a = np.triu(a, 1)
    return dc.DenseCoupling(a + a.T, validate=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def antiferro_pair():
    """The 2-spin antiferromagnet J12 = J21 = -1 (ground states (1,-1), (-1,1))."""
    J = dc.DenseCoupling(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    return dc.ProblemInstance(coupling=J, name="antiferro-2")


@pytest.fixture
def triangle_graph_text():
    return "3 3\n1 2 1\n2 3 1\n1 3 1\n"
