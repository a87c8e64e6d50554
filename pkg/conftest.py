"""Shared fixtures: small reference graphs and brute-force oracles."""
import sys
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from app.graph import Graph, build_graph

G5_EDGES = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)]


def brute_force_triangles(graph: Graph) -> list[tuple[int, int, int]]:
    """Every triangle as an ID-sorted triple, by enumerating all C(n, 3) node triples."""
    adj = [set(nbrs) for nbrs in graph.adjacency]
    return [
        (a, b, c)
        for a, b, c in combinations(range(graph.n), 3)
        if b in adj[a] and c in adj[a] and c in adj[b]
    ]


def brute_force_node_tallies(graph: Graph) -> list[int]:
    tallies = [0] * graph.n
    for tri in brute_force_triangles(graph):
        for v in tri:
            tallies[v] += 1
    return tallies


def random_graph(n: int, density: float, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u, v in combinations(range(n), 2) if rng.random() < density]
    return build_graph(edges, n=n)


def oracle_suite(count: int, max_n: int = 40, seed: int = 0) -> list[Graph]:
    """Seeded random graphs spanning sparse to near-complete densities."""
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(count):
        n = int(rng.integers(1, max_n + 1))
        density = float(rng.choice([0.05, 0.15, 0.3, 0.6, 0.9]))
        graphs.append(random_graph(n, density, seed * 100_000 + i))
    return graphs


def complete_graph(n: int) -> Graph:
    return build_graph(list(combinations(range(n), 2)), n=n)


def wheel_graph(rim: int) -> Graph:
    """Hub 0 joined to a rim cycle 1..rim."""
    edges = [(0, v) for v in range(1, rim + 1)]
    edges += [(v, v % rim + 1) for v in range(1, rim + 1)]
    return build_graph(edges)


@pytest.fixture
def g5() -> Graph:
    return build_graph(G5_EDGES)


@pytest.fixture
def k4() -> Graph:
    return complete_graph(4)


@pytest.fixture
def wheel() -> Graph:
    return wheel_graph(7)


@pytest.fixture
def star() -> Graph:
    return build_graph([(0, v) for v in range(1, 5)])


@pytest.fixture
def book() -> Graph:
    """Six triangles sharing the spine edge (0, 1); apexes 2..7."""
    return build_graph([(0, 1)] + [(s, a) for a in range(2, 8) for s in (0, 1)])
