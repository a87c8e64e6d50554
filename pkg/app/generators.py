"""Synthetic graph generators: Erdős–Rényi G(n, q) and preferential attachment PA(n, d)."""
from collections.abc import Iterator

import numpy as np

from app import TrigraphError
from app.graph import Graph, build_graph


class GeneratorParameterError(TrigraphError, ValueError):
    """Raised when generator parameters describe no valid graph."""


def _gnp_blocks(n: int, q: float, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Yield (k, 2) edge blocks, one block per source node u over targets v > u."""
    for u in range(n - 1):
        hits = np.flatnonzero(rng.random(n - u - 1) < q)
        if hits.size:
            block = np.empty((hits.size, 2), dtype=np.int64)
            block[:, 0] = u
            block[:, 1] = hits + u + 1
            yield block


def gen_gnp(n: int, d: float, seed: int) -> Graph:
    """Erdős–Rényi graph: every pair is an edge independently with q = d / (n - 1).

    Args:
        n: Node count.
        d: Expected average degree, 0 <= d <= n - 1.
        seed: Seed for numpy's PCG64 generator.
    """
    if n < 0:
        raise GeneratorParameterError(f"n must be non-negative, got {n}")
    if d < 0 or (n > 1 and d > n - 1) or (n <= 1 and d > 0):
        raise GeneratorParameterError(f"d must be in [0, n-1], got d={d}, n={n}")
    if n <= 1 or d == 0:
        return build_graph(np.zeros((0, 2), dtype=np.int64), n=n)
    q = d / (n - 1)
    rng = np.random.Generator(np.random.PCG64(seed))
    blocks = list(_gnp_blocks(n, q, rng))
    edges = np.concatenate(blocks) if blocks else np.zeros((0, 2), dtype=np.int64)
    return build_graph(edges, n=n)


def gen_pa(n: int, d: int, seed: int) -> Graph:
    """Preferential attachment graph with average degree close to d.

    Growth starts from a clique on d/2 + 1 nodes; each arriving node attaches d/2
    distinct edges to existing nodes drawn proportionally to their current degree
    (repeat-until-distinct sampling). Final edge count is about n*d/2.

    Args:
        n: Node count, n > d/2.
        d: Target average degree, even and >= 2.
        seed: Seed for numpy's PCG64 generator.
    """
    if d < 2 or d % 2:
        raise GeneratorParameterError(f"d must be even and >= 2, got {d}")
    k = d // 2
    if n <= k:
        raise GeneratorParameterError(f"n must exceed d/2, got n={n}, d={d}")
    rng = np.random.Generator(np.random.PCG64(seed))

    seed_nodes = k + 1
    edges: list[tuple[int, int]] = [
        (u, v) for u in range(seed_nodes) for v in range(u + 1, seed_nodes)
    ]
    # Every node appears once per incident edge, so a uniform pick is degree-proportional.
    endpoints: list[int] = [x for edge in edges for x in edge]
    for v in range(seed_nodes, n):
        targets: set[int] = set()
        while len(targets) < k:
            targets.add(endpoints[int(rng.integers(len(endpoints)))])
        for u in sorted(targets):
            edges.append((u, v))
            endpoints.append(u)
            endpoints.append(v)
    return build_graph(edges, n=n)
