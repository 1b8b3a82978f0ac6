from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mlmod import Aspect, CouplingSpec, ModularityParams, MultilayerNetwork


def make_single_layer(edges, n_nodes) -> MultilayerNetwork:
    return MultilayerNetwork(
        n_nodes=n_nodes,
        aspects=(Aspect("a", ("only",)),),
        within_edges=(tuple(edges),),
    )


@pytest.fixture
def two_cliques():
    """Two disjoint triangles in one 6-node layer."""
    edges = [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0),
             (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0)]
    return make_single_layer(edges, 6)


@pytest.fixture
def signed_triangle():
    """Triangle with two positive edges and one negative edge (2-3)."""
    edges = [(0, 1, 1.0), (0, 2, 1.0), (1, 2, -1.0)]
    return make_single_layer(edges, 3)


@pytest.fixture
def uniform_spec():
    return CouplingSpec(strategy="uniform", omega=1.0)


@pytest.fixture
def plain_params():
    def build(net, **kw):
        return ModularityParams.for_network(net, **kw)

    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
