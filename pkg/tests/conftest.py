import itertools
import random

import networkx as nx
import numpy as np
import pytest

from pwclique.graph import Graph, build_graph

# 1-based edge list of the six-vertex worked example used across the tests
SAMPLE_EDGES_1B = [(1, 2), (1, 5), (1, 6), (2, 3), (2, 4), (2, 5), (3, 4), (3, 5), (4, 5), (5, 6)]


def sample_graph() -> Graph:
    return build_graph(6, [(u - 1, v - 1) for u, v in SAMPLE_EDGES_1B])


@pytest.fixture
def sample():
    return sample_graph()


def random_graph(n: int, p: float, seed: int) -> Graph:
    rng = random.Random(seed)
    return build_graph(n, [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p])


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def nx_clique_number(g: Graph) -> int:
    """Independent oracle: networkx maximal-clique enumeration."""
    if g.n == 0:
        return 0
    return max(len(c) for c in nx.find_cliques(to_nx(g)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
