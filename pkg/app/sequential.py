"""Sequential triangle counting kernels.

NodeIterator++ walks the full sorted adjacency and checks closing edges by binary search;
NodeIteratorN works on the oriented structure (N_v) and counts |N_v ∩ N_u| per edge, so
each triangle is seen exactly once, at its ≺-smallest node.
"""
import logging
import time
from bisect import bisect_left
from typing import Any

import numpy as np

from app.graph import (
    EffectiveAdjacency,
    Graph,
    OrderKind,
    OrderRank,
    compute_order,
    effective_adjacency,
)
from app.sinks import EdgeTallySink, TriangleSink, canonical_edge

logger = logging.getLogger("trigraph")


def intersect_sorted(a: tuple[int, ...] | list[int], b: tuple[int, ...] | list[int]) -> list[int]:
    """Merge-style intersection of two strictly ascending sequences."""
    return intersect_sorted_cost(a, b)[0]


def intersect_sorted_cost(
    a: tuple[int, ...] | list[int], b: tuple[int, ...] | list[int]
) -> tuple[list[int], int]:
    """Merge-style intersection that also reports the number of element comparisons.

    Returns:
        (common elements ascending, comparisons made); comparisons <= len(a) + len(b).
    """
    out: list[int] = []
    i = j = comparisons = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        x, y = a[i], b[j]
        comparisons += 1
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return out, comparisons


def _has_edge(adjacency: tuple[tuple[int, ...], ...], u: int, w: int) -> bool:
    nbrs = adjacency[u]
    k = bisect_left(nbrs, w)
    return k < len(nbrs) and nbrs[k] == w


def count_node_iterator_pp(
    graph: Graph,
    order: OrderRank,
    sink: TriangleSink | None = None,
    use_intersection: bool = False,
) -> int:
    """NodeIterator++ over the full adjacency.

    For each v and each ordered pair of neighbors v ≺ u ≺ w, counts one triangle when
    (u, w) ∈ E. Membership is a binary search in the sorted adjacency of u; with
    ``use_intersection`` the closing neighbors are instead found as 𝒩_v ∩ 𝒩_u.
    """
    rank = order.rank.tolist()
    adjacency = graph.adjacency
    total = 0
    for v in range(graph.n):
        rv = rank[v]
        higher = [x for x in adjacency[v] if rank[x] > rv]
        if len(higher) < 2:
            continue
        if use_intersection:
            nbrs_v = set(adjacency[v])
            for u in higher:
                ru = rank[u]
                for w in nbrs_v.intersection(adjacency[u]):
                    if rank[w] > ru:
                        total += 1
                        if sink is not None:
                            sink.emit(v, u, w)
            continue
        for u in higher:
            ru = rank[u]
            for w in higher:
                if rank[w] > ru and _has_edge(adjacency, u, w):
                    total += 1
                    if sink is not None:
                        sink.emit(v, u, w)
    return total


def count_node_iterator_n(eff: EffectiveAdjacency, sink: TriangleSink | None = None) -> int:
    """NodeIteratorN: T = Σ_v Σ_{u∈N_v} |N_v ∩ N_u|, each triangle emitted once."""
    adj = eff.eff
    total = 0
    for v, nv in enumerate(adj):
        if len(nv) < 2:
            continue
        sv = set(nv)
        for u in nv:
            nu = adj[u]
            if not nu:
                continue
            if sink is None:
                total += len(sv.intersection(nu))
            else:
                for w in intersect_sorted(nv, nu):
                    total += 1
                    sink.emit(v, u, w)
    return total


def ordering_cost(graph: Graph, order: OrderRank) -> int:
    """Σ_v d_v·d̂_v for the given order (exact integer)."""
    src = np.repeat(np.arange(graph.n, dtype=np.int64), graph.degrees)
    effdeg = np.bincount(
        src[order.rank[src] < order.rank[graph.indices]], minlength=graph.n
    )
    return int(np.dot(graph.degrees.astype(np.int64), effdeg.astype(np.int64)))


def per_edge_triangle_counts(eff: EffectiveAdjacency) -> dict[tuple[int, int], int]:
    """t_e for every edge, keyed by (min, max); edges in no triangle map to 0."""
    sink = EdgeTallySink()
    count_node_iterator_n(eff, sink)
    counts = {canonical_edge(v, u): 0 for v, nv in enumerate(eff.eff) for u in nv}
    counts.update(sink.tallies)
    return counts


def compare_sequential(graph: Graph, seed: int = 0, timings: bool = False) -> dict[str, Any]:
    """Run the sequential kernels and evaluate every ordering on one graph.

    ``total`` and ``cost`` are exact. Wall-clock ``seconds`` are added only when
    ``timings`` is set, since they differ between otherwise identical runs.
    """
    degree_order = compute_order(graph, OrderKind.BY_DEGREE)
    algorithms = []
    runs = [
        ("node-iterator-pp", lambda: count_node_iterator_pp(graph, degree_order)),
        (
            "node-iterator-pp-intersect",
            lambda: count_node_iterator_pp(graph, degree_order, use_intersection=True),
        ),
        (
            "node-iterator-n",
            lambda: count_node_iterator_n(effective_adjacency(graph, degree_order)),
        ),
    ]
    for name, fn in runs:
        start = time.perf_counter()
        row: dict[str, Any] = {"name": name, "total": fn()}
        if timings:
            row["seconds"] = round(time.perf_counter() - start, 6)
        algorithms.append(row)

    orderings = []
    for kind in OrderKind:
        order = compute_order(graph, kind, seed=seed)
        start = time.perf_counter()
        count_node_iterator_n(effective_adjacency(graph, order))
        row = {"ordering": kind.value, "cost": ordering_cost(graph, order)}
        if timings:
            row["seconds"] = round(time.perf_counter() - start, 6)
        orderings.append(row)
    logger.info("Sequential benchmark done on n=%d, m=%d", graph.n, graph.m)
    return {"algorithms": algorithms, "orderings": orderings}
