"""Canonical undirected graph, node orderings and effective adjacency.

Every engine reads the same three immutable structures:

* ``Graph``: per-node ID-sorted neighbor tuples plus degrees (CSR arrays kept for
  vectorized work).
* ``OrderRank``: a total order over nodes stored as a rank permutation.
* ``EffectiveAdjacency``: for each v the ID-sorted tuple N_v of neighbors u with v ≺ u.
"""
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from itertools import chain

import numpy as np
from scipy import sparse

from app import TrigraphError


class GraphInputError(TrigraphError, ValueError):
    """Raised when edge input cannot describe a simple undirected graph."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on nodes 0..n-1."""

    n: int
    m: int
    indptr: np.ndarray
    indices: np.ndarray
    adjacency: tuple[tuple[int, ...], ...]
    degrees: np.ndarray

    def edges(self) -> Iterable[tuple[int, int]]:
        """Yield each undirected edge once as (u, v) with u < v, in ascending order."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency


def _as_edge_array(edge_pairs: Iterable[tuple[int, int]] | np.ndarray) -> np.ndarray:
    if isinstance(edge_pairs, np.ndarray):
        arr = edge_pairs.astype(np.int64, copy=False)
    else:
        arr = np.fromiter(chain.from_iterable(edge_pairs), dtype=np.int64)
    if arr.size % 2:
        raise GraphInputError("edge input must contain pairs of node IDs")
    return arr.reshape(-1, 2)


def build_graph(
    edge_pairs: Iterable[tuple[int, int]] | np.ndarray, n: int | None = None
) -> Graph:
    """Build a Graph from (u, v) pairs.

    Self-loops are dropped and duplicate or reversed duplicate edges merged. The node
    count is 1 + max ID unless ``n`` is given (allows isolated trailing nodes).

    Args:
        edge_pairs: Iterable of node ID pairs or an (k, 2) integer array.
        n: Optional explicit node count, at least 1 + max ID.

    Returns:
        Graph with ID-sorted adjacency tuples.
    """
    arr = _as_edge_array(edge_pairs)
    if arr.size and arr.min() < 0:
        raise GraphInputError("node IDs must be non-negative")
    min_n = int(arr.max()) + 1 if arr.size else 0
    if n is None:
        n = min_n
    elif n < min_n:
        raise GraphInputError(f"n={n} is smaller than 1 + max node ID ({min_n})")

    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return Graph(
            n=0,
            m=0,
            indptr=np.zeros(1, dtype=np.int64),
            indices=empty,
            adjacency=(),
            degrees=empty,
        )

    arr = arr[arr[:, 0] != arr[:, 1]]
    src = np.concatenate([arr[:, 0], arr[:, 1]])
    dst = np.concatenate([arr[:, 1], arr[:, 0]])
    csr = sparse.csr_matrix(
        (np.ones(src.size, dtype=np.int32), (src, dst)), shape=(n, n)
    )
    csr.sum_duplicates()
    indptr = csr.indptr.astype(np.int64)
    indices = csr.indices.astype(np.int64)
    degrees = np.diff(indptr)
    flat = indices.tolist()
    bounds = indptr.tolist()
    adjacency = tuple(tuple(flat[bounds[v] : bounds[v + 1]]) for v in range(n))
    return Graph(
        n=n,
        m=int(indices.size // 2),
        indptr=indptr,
        indices=indices,
        adjacency=adjacency,
        degrees=degrees,
    )


class OrderKind(str, Enum):
    """Total orders over nodes used to orient edges."""

    BY_ID = "id"
    BY_DEGREE = "degree"
    BY_RANDOM = "random"
    BY_CORENESS = "coreness"


@dataclass(frozen=True, eq=False)
class OrderRank:
    """Total order ≺ realized as a rank permutation: u ≺ v iff rank[u] < rank[v]."""

    rank: np.ndarray
    kind: OrderKind = OrderKind.BY_DEGREE

    @property
    def sequence(self) -> np.ndarray:
        """Nodes listed in ascending ≺ order."""
        return np.argsort(self.rank, kind="stable")

    def precedes(self, u: int, v: int) -> bool:
        return bool(self.rank[u] < self.rank[v])

    @classmethod
    def from_sequence(cls, sequence: np.ndarray, kind: OrderKind) -> "OrderRank":
        rank = np.empty(len(sequence), dtype=np.int64)
        rank[np.asarray(sequence, dtype=np.int64)] = np.arange(len(sequence))
        return cls(rank=rank, kind=kind)


def coreness(graph: Graph) -> np.ndarray:
    """Core number of every node by bucket-based peeling.

    core[v] is the largest k such that v belongs to a subgraph of minimum degree k.
    Runs in O(n + m).
    """
    n = graph.n
    deg = graph.degrees.tolist()
    max_deg = max(deg, default=0)
    bins = [0] * (max_deg + 1)
    for d in deg:
        bins[d] += 1
    start = 0
    for d in range(max_deg + 1):
        count = bins[d]
        bins[d] = start
        start += count
    pos = [0] * n
    vert = [0] * n
    for v in range(n):
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(max_deg, 0, -1):
        bins[d] = bins[d - 1]
    if bins:
        bins[0] = 0

    adjacency = graph.adjacency
    for i in range(n):
        v = vert[i]
        dv = deg[v]
        for u in adjacency[v]:
            du = deg[u]
            if du > dv:
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bins[du] += 1
                deg[u] = du - 1
    return np.asarray(deg, dtype=np.int64)


def compute_order(graph: Graph, kind: OrderKind | str, seed: int = 0) -> OrderRank:
    """Rank nodes under the requested total order.

    ById: rank[v] = v. ByDegree: (degree, ID) ascending. ByRandom: seeded permutation
    from numpy's PCG64 generator. ByCoreness: (core number, degree, ID) ascending.
    """
    kind = OrderKind(kind)
    ids = np.arange(graph.n, dtype=np.int64)
    if kind is OrderKind.BY_ID:
        sequence = ids
    elif kind is OrderKind.BY_DEGREE:
        sequence = np.lexsort((ids, graph.degrees))
    elif kind is OrderKind.BY_RANDOM:
        sequence = np.random.Generator(np.random.PCG64(seed)).permutation(graph.n)
    else:
        sequence = np.lexsort((ids, graph.degrees, coreness(graph)))
    return OrderRank.from_sequence(sequence, kind)


@dataclass(frozen=True, eq=False)
class EffectiveAdjacency:
    """Per-node N_v = {u in adjacency[v] : v ≺ u}, each tuple ascending by node ID."""

    eff: tuple[tuple[int, ...], ...]
    effdeg: np.ndarray
    order: OrderRank

    @property
    def n(self) -> int:
        return len(self.eff)

    @property
    def m(self) -> int:
        return int(self.effdeg.sum())

    def __getitem__(self, v: int) -> tuple[int, ...]:
        return self.eff[v]


def effective_adjacency(graph: Graph, order: OrderRank) -> EffectiveAdjacency:
    """Orient every edge from its ≺-lower endpoint and keep ID order inside each N_v."""
    rank = order.rank
    if rank.size != graph.n:
        raise GraphInputError(
            f"order covers {rank.size} nodes but the graph has {graph.n}"
        )
    src = np.repeat(np.arange(graph.n, dtype=np.int64), graph.degrees)
    keep = rank[src] < rank[graph.indices]
    effdeg = np.bincount(src[keep], minlength=graph.n).astype(np.int64)
    bounds = np.concatenate([[0], np.cumsum(effdeg)]).tolist()
    flat = graph.indices[keep].tolist()
    eff = tuple(tuple(flat[bounds[v] : bounds[v + 1]]) for v in range(graph.n))
    return EffectiveAdjacency(eff=eff, effdeg=effdeg, order=order)
