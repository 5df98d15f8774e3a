"""Shared fixtures: small sampled clusters and their operator sets."""
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dtcsim.lattice import normalized_to_median, orient_graph, sample_graph
from dtcsim.operators import build_hdd
from dtcsim.propagator import cached_operators

settings.register_profile(
    "numerics",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numerics")


def small_system(n_spins: int, seed: int = 11):
    """(graph, ops, hdd) with median |J| = 1 and a balanced axis."""
    graph = normalized_to_median(orient_graph(sample_graph(n_spins, 0.9, 1.1, seed)))
    ops = cached_operators(n_spins)
    return graph, ops, build_hdd(graph, ops)


@pytest.fixture(scope="session")
def system4():
    return small_system(4)


@pytest.fixture(scope="session")
def system6():
    return small_system(6)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(2024)
