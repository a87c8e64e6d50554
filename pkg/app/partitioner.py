"""Load-balancing cost functions, prefix-sum boundaries and per-rank partitions.

A plan splits the node IDs into p contiguous core ranges [x_i, x_{i+1}). Overlapping
partitions (AOP) also keep the oriented neighbor lists of every node reachable from the
core, so counting needs no communication; non-overlapping partitions (ANOP) keep only the
core's lists, so each edge is stored once across all ranks.
"""
import json
import logging
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app import TrigraphError
from app.graph import EffectiveAdjacency, Graph

logger = logging.getLogger("trigraph")


class PartitionError(TrigraphError, ValueError):
    """Raised for an invalid rank count, rank index or serialized plan."""


class UnknownCostKindError(TrigraphError, ValueError):
    pass


class CostKind(str, Enum):
    """Per-node cost estimates f(v) used to balance work across ranks."""

    N = "N"
    D = "D"
    DH = "DH"
    DDH = "DDH"
    DH2 = "DH2"
    DPD = "DPD"
    NOV = "NOV"

    @classmethod
    def parse(cls, value: "CostKind | str") -> "CostKind":
        try:
            return cls(value if isinstance(value, cls) else str(value).upper())
        except ValueError:
            raise UnknownCostKindError(f"unknown cost kind: {value!r}") from None


@dataclass(frozen=True, eq=False)
class CostVector:
    """f(v) per node and its inclusive prefix sums F(t) = Σ_{v<=t} f(v)."""

    f: np.ndarray
    kind: CostKind

    @property
    def F(self) -> np.ndarray:
        return np.cumsum(self.f, dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.f.sum())


def _oriented_arrays(graph: Graph, eff: EffectiveAdjacency) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(src, dst, forward) over the 2m adjacency entries; forward marks src ≺ dst."""
    src = np.repeat(np.arange(graph.n, dtype=np.int64), graph.degrees)
    dst = graph.indices
    rank = eff.order.rank
    return src, dst, rank[src] < rank[dst]


def node_costs(
    graph: Graph,
    eff: EffectiveAdjacency,
    kind: CostKind | str,
    dpd_all_neighbors: bool = False,
) -> CostVector:
    """Evaluate f(v) for every node under the requested cost kind.

    DPD sums d̂_v + d̂_u over u in N_v; ``dpd_all_neighbors`` switches to the sum over the
    whole neighborhood 𝒩_v. NOV sums over 𝒩_v − N_v (the non-overlapping engine's cost).
    """
    kind = CostKind.parse(kind)
    n = graph.n
    d = graph.degrees.astype(np.int64)
    dh = eff.effdeg.astype(np.int64)
    if kind is CostKind.N:
        f = np.ones(n, dtype=np.int64)
    elif kind is CostKind.D:
        f = d.copy()
    elif kind is CostKind.DH:
        f = dh.copy()
    elif kind is CostKind.DDH:
        f = d * dh
    elif kind is CostKind.DH2:
        f = dh * dh
    else:
        src, dst, forward = _oriented_arrays(graph, eff)
        if kind is CostKind.DPD and not dpd_all_neighbors:
            mask = forward
            count = dh
        elif kind is CostKind.DPD:
            mask = np.ones(src.size, dtype=bool)
            count = d
        else:
            mask = ~forward
            count = d - dh
        neighbor_sum = np.zeros(n, dtype=np.int64)
        np.add.at(neighbor_sum, src[mask], dh[dst[mask]])
        f = count * dh + neighbor_sum
    return CostVector(f=f, kind=kind)


@dataclass(frozen=True)
class PartitionPlan:
    """Boundaries x_0 = 0 <= x_1 <= ... <= x_p = n; rank i owns [x_i, x_{i+1})."""

    boundaries: tuple[int, ...]

    @property
    def p(self) -> int:
        return len(self.boundaries) - 1

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    def core(self, i: int) -> range:
        if not 0 <= i < self.p:
            raise PartitionError(f"rank {i} outside [0, {self.p})")
        return range(self.boundaries[i], self.boundaries[i + 1])

    def owner(self, v: int) -> int:
        """Rank whose core range contains v (empty ranges are skipped)."""
        return bisect_right(self.boundaries, v) - 1

    def rank_costs(self, costs: CostVector) -> list[int]:
        """Estimated cost Σ_{v in core(i)} f(v) for every rank."""
        prefix = np.concatenate([[0], costs.F])
        return [
            int(prefix[self.boundaries[i + 1]] - prefix[self.boundaries[i]])
            for i in range(self.p)
        ]

    def to_json(self) -> str:
        return json.dumps(list(self.boundaries))

    @classmethod
    def from_json(cls, text: str) -> "PartitionPlan":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise PartitionError(f"plan is not valid JSON: {e}") from e
        if not isinstance(raw, list) or len(raw) < 2 or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in raw
        ):
            raise PartitionError("plan must be a JSON array of at least two integers")
        if raw[0] != 0 or any(a > b for a, b in zip(raw, raw[1:])):
            raise PartitionError(f"plan boundaries must start at 0 and not decrease: {raw}")
        return cls(boundaries=tuple(raw))


def compute_boundaries(costs: CostVector, p: int) -> PartitionPlan:
    """Split nodes into p contiguous ranges of roughly equal cost α = F(n-1)/p.

    x_j is one past the first node v with F(v) >= jα, so the exclusive prefix before x_j
    is below jα and the prefix through x_j reaches it. The comparison is done on integers
    as p·F(v) >= j·F(n-1). With zero total cost every node counts as 1.
    """
    if p < 1:
        raise PartitionError(f"rank count must be >= 1, got {p}")
    f = costs.f.astype(np.int64)
    n = int(f.size)
    if n and not f.any():
        f = np.ones(n, dtype=np.int64)
    F = np.cumsum(f, dtype=np.int64)
    total = int(F[-1]) if n else 0
    scaled = F * p
    boundaries = [0]
    for j in range(1, p):
        x = int(np.searchsorted(scaled, j * total, side="left")) + 1 if n else 0
        boundaries.append(min(max(x, boundaries[-1]), n))
    boundaries.append(n)
    plan = PartitionPlan(boundaries=tuple(boundaries))
    logger.debug("Plan p=%d cost=%s boundaries=%s", p, costs.kind.value, plan.boundaries)
    return plan


@dataclass(frozen=True)
class OverlapPartition:
    """Core range plus N_w for every w reachable from the core, trimmed to the partition."""

    rank: int
    core: range
    vertices: frozenset[int]
    eff: dict[int, tuple[int, ...]]

    @property
    def stored_entries(self) -> int:
        return sum(len(nv) for nv in self.eff.values())


@dataclass(frozen=True)
class NonOverlapPartition:
    """Core range plus N_v for core nodes only; ``plan`` resolves owners of other nodes."""

    rank: int
    core: range
    eff: dict[int, tuple[int, ...]]
    plan: PartitionPlan

    @property
    def stored_entries(self) -> int:
        return sum(len(nv) for nv in self.eff.values())

    def is_core(self, v: int) -> bool:
        return self.core.start <= v < self.core.stop


def build_overlap_partition(
    graph: Graph, eff: EffectiveAdjacency, plan: PartitionPlan, i: int
) -> OverlapPartition:
    """Overlapping partition for rank i: V_i = V_i^c ∪ ⋃_{v in V_i^c} N_v."""
    core = plan.core(i)
    vertices = set(core)
    for v in core:
        vertices.update(eff[v])
    local: dict[int, tuple[int, ...]] = {}
    for w in sorted(vertices):
        nw = eff[w]
        if w in core:
            local[w] = nw
        else:
            local[w] = tuple(x for x in nw if x in vertices)
    return OverlapPartition(rank=i, core=core, vertices=frozenset(vertices), eff=local)


def build_nonoverlap_partition(
    graph: Graph, eff: EffectiveAdjacency, plan: PartitionPlan, i: int
) -> NonOverlapPartition:
    """Non-overlapping partition for rank i: N_v for v in V_i^c only."""
    core = plan.core(i)
    return NonOverlapPartition(
        rank=i, core=core, eff={v: eff[v] for v in core}, plan=plan
    )


def partition_storage(
    graph: Graph, eff: EffectiveAdjacency, plan: PartitionPlan
) -> dict[str, float | int | list[int]]:
    """Stored N_v entries per rank under both partition schemes."""
    overlap = [build_overlap_partition(graph, eff, plan, i).stored_entries for i in range(plan.p)]
    nonoverlap = [
        build_nonoverlap_partition(graph, eff, plan, i).stored_entries for i in range(plan.p)
    ]
    total_non = sum(nonoverlap)
    return {
        "overlapPerRank": overlap,
        "nonOverlapPerRank": nonoverlap,
        "overlapTotal": sum(overlap),
        "nonOverlapTotal": total_non,
        "ratio": (sum(overlap) / total_non) if total_non else 1.0,
    }
