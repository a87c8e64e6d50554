"""Edge sparsification (keep each stored entry with probability q) and the 1/q³ estimator.

Retention is decided by a counter-based hash of (seed, rank, v, u), so a decision depends
only on its key. Per-partition mode keys on the rank, making an edge stored in two
overlapping partitions survive independently in each; global mode keys every undirected
edge once (rank -1, canonical endpoints), reproducing plain sequential DOULION.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from itertools import chain, compress
from math import comb
from typing import Any

import numpy as np

from app import TrigraphError
from app.engines import EngineKind, PreparedRun, execute_run, prepare_run
from app.graph import EffectiveAdjacency, Graph, OrderKind, compute_order, effective_adjacency
from app.partitioner import CostKind, PartitionPlan
from app.runtime import ExecutionMode
from app.sequential import count_node_iterator_n
from app.sinks import canonical_edge

logger = logging.getLogger("trigraph")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


class SparsifyError(TrigraphError, ValueError):
    """Raised for a retention probability outside (0, 1]."""


class SparsifyMode(str, Enum):
    PER_PARTITION = "per-partition"
    GLOBAL = "global"


def default_mode(engine: EngineKind | str) -> SparsifyMode:
    """AOP sparsifies each partition independently; ANOP and seq sparsify the edge set once."""
    if EngineKind.parse(engine) is EngineKind.AOP:
        return SparsifyMode.PER_PARTITION
    return SparsifyMode.GLOBAL


@dataclass(frozen=True)
class SparsifyConfig:
    q: float
    seed: int = 0
    mode: SparsifyMode = SparsifyMode.GLOBAL

    def __post_init__(self) -> None:
        if not 0.0 < self.q <= 1.0:
            raise SparsifyError(f"q must be in (0, 1], got {self.q}")


def _splitmix(x: np.ndarray) -> np.ndarray:
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _MUL1
    x = (x ^ (x >> np.uint64(27))) * _MUL2
    return x ^ (x >> np.uint64(31))


def retention_uniforms(seed: int, rank: int, v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Uniforms in [0, 1) keyed by (seed, rank, v, u), one per (v, u) entry."""
    v = np.asarray(v, dtype=np.int64).astype(np.uint64)
    u = np.asarray(u, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        h = _splitmix(np.full(v.shape, seed & _MASK, dtype=np.uint64))
        h = _splitmix(h ^ np.uint64(rank & _MASK))
        h = _splitmix(h ^ v)
        h = _splitmix(h ^ u)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def sparsify_partition(
    eff: dict[int, tuple[int, ...]], config: SparsifyConfig, rank: int = -1
) -> dict[int, tuple[int, ...]]:
    """Keep each stored (v, u) entry with probability q; lists stay ID-sorted.

    Args:
        eff: The stored N_v lists of one partition.
        config: q, seed and mode.
        rank: The owning rank; ignored in global mode.
    """
    nodes = list(eff)
    lengths = np.fromiter((len(eff[v]) for v in nodes), dtype=np.int64, count=len(nodes))
    if config.q >= 1.0 or not lengths.sum():
        return dict(eff)
    src = np.repeat(np.asarray(nodes, dtype=np.int64), lengths)
    dst = np.fromiter(chain.from_iterable(eff[v] for v in nodes), dtype=np.int64)
    if config.mode is SparsifyMode.GLOBAL:
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        keep = retention_uniforms(config.seed, -1, lo, hi) < config.q
    else:
        keep = retention_uniforms(config.seed, rank, src, dst) < config.q
    segment = np.repeat(np.arange(len(nodes), dtype=np.int64), lengths)
    counts = np.bincount(segment[keep], minlength=len(nodes))
    bounds = np.concatenate([[0], np.cumsum(counts)]).tolist()
    kept = list(compress(dst.tolist(), keep.tolist()))
    return {v: tuple(kept[bounds[i] : bounds[i + 1]]) for i, v in enumerate(nodes)}


class ApproxRunner:
    """Prepared engine run that can be re-sparsified and recounted per seed."""

    def __init__(
        self,
        graph: Graph,
        p: int,
        engine: EngineKind | str,
        q: float,
        cost_kind: CostKind | str = CostKind.DPD,
        ordering: OrderKind | str = OrderKind.BY_DEGREE,
        sparsify_mode: SparsifyMode | str | None = None,
        runtime_mode: ExecutionMode | str | None = None,
    ) -> None:
        SparsifyConfig(q)
        self.q = q
        self.prepared: PreparedRun = prepare_run(graph, p, engine, cost_kind, ordering)
        self.mode = SparsifyMode(sparsify_mode) if sparsify_mode else default_mode(engine)
        self.runtime_mode = runtime_mode

    def sparsified(self, seed: int) -> PreparedRun:
        config = SparsifyConfig(self.q, seed, self.mode)
        partitions = [
            replace(part, eff=sparsify_partition(part.eff, config, rank=i))
            for i, part in enumerate(self.prepared.partitions)
        ]
        return self.prepared.with_partitions(partitions)

    def count(self, seed: int) -> int:
        """Exact triangle count T' of the sparsified structure."""
        return execute_run(self.sparsified(seed), mode=self.runtime_mode).total

    def estimate(self, seed: int) -> float:
        return self.count(seed) / self.q**3


def approx_count(
    graph: Graph,
    p: int,
    engine: EngineKind | str,
    q: float,
    seed: int,
    cost_kind: CostKind | str = CostKind.DPD,
    ordering: OrderKind | str = OrderKind.BY_DEGREE,
    sparsify_mode: SparsifyMode | str | None = None,
    runtime_mode: ExecutionMode | str | None = None,
) -> float:
    """Unbiased estimate T'/q³ from one sparsified run."""
    runner = ApproxRunner(graph, p, engine, q, cost_kind, ordering, sparsify_mode, runtime_mode)
    return runner.estimate(seed)


@dataclass(frozen=True)
class VarianceReport:
    """Exact T, shared-edge triangle pairs and the analytic estimator variances."""

    q: float
    triangles: int
    k: int
    k_prime: int

    @property
    def k_cross(self) -> int:
        return self.k - self.k_prime

    def _variance(self, pairs: int) -> float:
        return (1.0 / self.q**3 - 1.0) * self.triangles + 2.0 * pairs * (1.0 / self.q - 1.0)

    @property
    def var(self) -> float:
        return self._variance(self.k)

    @property
    def var_prime(self) -> float:
        return self._variance(self.k_prime)

    def to_dict(self) -> dict[str, Any]:
        return {
            "q": self.q,
            "T": self.triangles,
            "k": self.k,
            "kPrime": self.k_prime,
            "kCross": self.k_cross,
            "analyticVar": self.var,
            "analyticVarPrime": self.var_prime,
        }


class _SharedEdgeSink:
    """Tallies triangles per edge overall and per (edge, partition of the ≺-smallest apex)."""

    def __init__(self, plan: PartitionPlan) -> None:
        self.plan = plan
        self.triangles = 0
        self.per_edge: dict[tuple[int, int], int] = {}
        self.per_edge_partition: dict[tuple[int, int, int], int] = {}

    def emit(self, v: int, u: int, w: int) -> None:
        self.triangles += 1
        part = self.plan.owner(v)
        for a, b in (canonical_edge(v, u), canonical_edge(v, w), canonical_edge(u, w)):
            self.per_edge[(a, b)] = self.per_edge.get((a, b), 0) + 1
            key = (a, b, part)
            self.per_edge_partition[key] = self.per_edge_partition.get(key, 0) + 1


def variance_report(
    graph: Graph, plan: PartitionPlan, q: float, eff: EffectiveAdjacency | None = None
) -> VarianceReport:
    """k = Σ_e C(t_e, 2) and k' restricted to pairs counted by the same partition.

    Triangles belong to the partition whose core holds their ≺-smallest node under the
    degree order (or under ``eff``'s order when given).
    """
    SparsifyConfig(q)
    if eff is None:
        eff = effective_adjacency(graph, compute_order(graph, OrderKind.BY_DEGREE))
    sink = _SharedEdgeSink(plan)
    count_node_iterator_n(eff, sink)
    k = sum(comb(t, 2) for t in sink.per_edge.values())
    k_prime = sum(comb(t, 2) for t in sink.per_edge_partition.values())
    return VarianceReport(q=q, triangles=sink.triangles, k=k, k_prime=k_prime)


def approx_report(
    graph: Graph,
    p: int,
    engine: EngineKind | str,
    q: float,
    runs: int,
    seed: int,
    cost_kind: CostKind | str = CostKind.DPD,
    ordering: OrderKind | str = OrderKind.BY_DEGREE,
    sparsify_mode: SparsifyMode | str | None = None,
    runtime_mode: ExecutionMode | str | None = None,
) -> dict[str, Any]:
    """Run ``runs`` seeded estimates (seeds seed, seed+1, ...) and summarize their accuracy."""
    runner = ApproxRunner(graph, p, engine, q, cost_kind, ordering, sparsify_mode, runtime_mode)
    variance = variance_report(graph, runner.prepared.plan, q, eff=runner.prepared.eff)
    exact = variance.triangles
    estimates = np.array([runner.estimate(seed + r) for r in range(runs)], dtype=np.float64)
    sample_var = float(estimates.var(ddof=1)) if runs > 1 else 0.0
    if exact:
        errors = np.abs(estimates - exact) / exact * 100.0
        avg_err, max_err = float(errors.mean()), float(errors.max())
    else:
        avg_err = max_err = 0.0
    logger.info(
        "Approx %s q=%s runs=%d: mean=%.3f exact=%d avg error=%.2f%%",
        EngineKind.parse(engine).value,
        q,
        runs,
        float(estimates.mean()),
        exact,
        avg_err,
    )
    return {
        "engine": EngineKind.parse(engine).value,
        "mode": runner.mode.value,
        "q": q,
        "runs": runs,
        "exact": exact,
        "estimates": estimates.tolist(),
        "mean": float(estimates.mean()),
        "sampleVariance": sample_var,
        "analyticVar": variance.var,
        "analyticVarPrime": variance.var_prime,
        "k": variance.k,
        "kPrime": variance.k_prime,
        "avgErrorPct": avg_err,
        "maxErrorPct": max_err,
    }
