"""Parallel triangle counting engines and distributed clustering aggregation.

AOP counts inside overlapping partitions with no messages. ANOP keeps each edge on one
rank and fetches remote lists either directly (request/reply per needed N_u) or by
surrogate shipping (send N_v once to every rank owning some of its members and let that
rank do the intersections).
"""
import logging
from bisect import bisect_left
from collections import Counter, defaultdict, deque
from collections.abc import Callable, Generator
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any

import numpy as np

from app import TrigraphError
from app.graph import (
    EffectiveAdjacency,
    Graph,
    OrderKind,
    compute_order,
    effective_adjacency,
)
from app.partitioner import (
    CostKind,
    CostVector,
    NonOverlapPartition,
    OverlapPartition,
    PartitionPlan,
    build_nonoverlap_partition,
    build_overlap_partition,
    compute_boundaries,
    node_costs,
    partition_storage,
)
from app.report import ClusteringResult, RankStats, RunReport, imbalance
from app.runtime import (
    YIELD_ONLY,
    ExecutionMode,
    Message,
    MessageKind,
    MessageTag,
    ProtocolError,
    RankContext,
    Runtime,
    Wait,
)
from app.sequential import count_node_iterator_n, intersect_sorted_cost
from app.sinks import TriangleSink
from config.config import Config
from config.utils import config_int

logger = logging.getLogger("trigraph")

SinkFactory = Callable[[int], TriangleSink]


class UnknownEngineError(TrigraphError, ValueError):
    pass


class EngineKind(str, Enum):
    SEQ = "seq"
    AOP = "aop"
    ANOP_DIRECT = "anop-direct"
    ANOP_SURROGATE = "anop-surrogate"

    @classmethod
    def parse(cls, value: "EngineKind | str") -> "EngineKind":
        try:
            return cls(value)
        except ValueError:
            raise UnknownEngineError(f"unknown engine: {value!r}") from None

    @property
    def overlapping(self) -> bool:
        return self is EngineKind.AOP


@dataclass(frozen=True)
class RankResult:
    triangles: int
    realized_cost: int


def _intersect_into(
    v: int, u: int, nv: tuple[int, ...], nu: tuple[int, ...], sink: TriangleSink | None
) -> tuple[int, int]:
    common, comparisons = intersect_sorted_cost(nv, nu)
    if sink is not None:
        for w in common:
            sink.emit(v, u, w)
    return len(common), comparisons


def aop_count(partition: OverlapPartition, sink: TriangleSink | None = None) -> RankResult:
    """Count triangles whose ≺-smallest node is a core node, using partition-local lists only."""
    eff = partition.eff
    triangles = cost = 0
    for v in partition.core:
        nv = eff[v]
        for u in nv:
            t, c = _intersect_into(v, u, nv, eff[u], sink)
            triangles += t
            cost += c
    return RankResult(triangles, cost)


def anop_direct_count(
    partition: NonOverlapPartition,
    ctx: RankContext,
    sink: TriangleSink | None = None,
    poll_every: int = 1,
) -> Generator[Wait, None, RankResult]:
    """Non-overlapping count that fetches N_u from its owner for every off-core u ∈ N_v.

    Nothing is cached: a list needed for k different core nodes is fetched k times. While
    waiting for replies the rank keeps answering requests from its peers.
    """
    eff = partition.eff
    plan = partition.plan
    replies: dict[int, deque[tuple[int, ...]]] = defaultdict(deque)
    outstanding: Counter[int] = Counter()

    def serve(messages: list[Message]) -> None:
        for msg in messages:
            if msg.kind is MessageKind.CONTROL:
                continue
            if msg.tag is MessageTag.REQUEST:
                if not partition.is_core(msg.node):
                    raise ProtocolError(
                        f"rank {ctx.rank} asked for N_{msg.node}, which it does not own"
                    )
                ctx.send(
                    msg.src,
                    Message.data(ctx.rank, MessageTag.REPLY, node=msg.node, payload=eff[msg.node]),
                )
            elif msg.tag is MessageTag.REPLY:
                if outstanding[msg.node] == 0:
                    raise ProtocolError(
                        f"rank {ctx.rank} got N_{msg.node} from rank {msg.src} without asking"
                    )
                outstanding[msg.node] -= 1
                replies[msg.node].append(msg.payload)
            else:
                raise ProtocolError(f"direct engine cannot handle {msg.tag} from rank {msg.src}")

    triangles = cost = 0
    for idx, v in enumerate(partition.core, start=1):
        nv = eff[v]
        remote = [u for u in nv if not partition.is_core(u)]
        for u in remote:
            outstanding[u] += 1
            ctx.send(plan.owner(u), Message.data(ctx.rank, MessageTag.REQUEST, node=u))
        for u in nv:
            if partition.is_core(u):
                t, c = _intersect_into(v, u, nv, eff[u], sink)
                triangles += t
                cost += c
        while sum(outstanding.values()):
            serve(ctx.drain())
            if sum(outstanding.values()):
                yield ctx.wait_for_messages()
        for u in remote:
            t, c = _intersect_into(v, u, nv, replies[u].popleft(), sink)
            triangles += t
            cost += c
        if idx % poll_every == 0:
            serve(ctx.drain())
            yield YIELD_ONLY

    ctx.broadcast_control()
    while True:
        serve(ctx.drain())
        if ctx.all_controls_received:
            break
        yield ctx.wait_for_messages()
    return RankResult(triangles, cost)


def surrogate_handle(
    x: tuple[int, ...],
    partition: NonOverlapPartition,
    source: int,
    sink: TriangleSink | None = None,
) -> RankResult:
    """Count triangles for a shipped list X = N_source at the rank owning some of its members.

    Core members of X are contiguous in the ID-sorted list, so two bisections over X locate
    them; each contributes |N_u ∩ X|.
    """
    lo = bisect_left(x, partition.core.start)
    hi = bisect_left(x, partition.core.stop, lo)
    eff = partition.eff
    triangles = cost = 0
    for u in x[lo:hi]:
        t, c = _intersect_into(source, u, x, eff[u], sink)
        triangles += t
        cost += c
    return RankResult(triangles, cost)


def anop_surrogate_count(
    partition: NonOverlapPartition,
    ctx: RankContext,
    sink: TriangleSink | None = None,
    poll_every: int = 1,
) -> Generator[Wait, None, RankResult]:
    """Non-overlapping count that ships N_v to the owners of its off-core members.

    ``last_proc`` remembers the rank N_v was last sent to; since N_v is ID-sorted and core
    ranges are contiguous, it suffices to send at most one copy per destination.
    """
    eff = partition.eff
    plan = partition.plan
    triangles = cost = 0

    def handle(messages: list[Message]) -> None:
        nonlocal triangles, cost
        for msg in messages:
            if msg.kind is MessageKind.CONTROL:
                continue
            if msg.tag is not MessageTag.SURROGATE:
                raise ProtocolError(f"surrogate engine cannot handle {msg.tag} from rank {msg.src}")
            result = surrogate_handle(msg.payload, partition, msg.node, sink)
            triangles += result.triangles
            cost += result.realized_cost

    for idx, v in enumerate(partition.core, start=1):
        nv = eff[v]
        last_proc = -1
        for u in nv:
            if partition.is_core(u):
                t, c = _intersect_into(v, u, nv, eff[u], sink)
                triangles += t
                cost += c
                continue
            j = plan.owner(u)
            if j != last_proc:
                ctx.send(j, Message.data(ctx.rank, MessageTag.SURROGATE, node=v, payload=nv))
                last_proc = j
        if idx % poll_every == 0:
            handle(ctx.drain())
            yield YIELD_ONLY

    ctx.broadcast_control()
    while True:
        handle(ctx.drain())
        if ctx.all_controls_received:
            break
        yield ctx.wait_for_messages()
    return RankResult(triangles, cost)


@dataclass(frozen=True, eq=False)
class PreparedRun:
    """Everything an engine needs before the ranks start: order, eff, costs, plan, partitions."""

    engine: EngineKind
    graph: Graph
    eff: EffectiveAdjacency
    costs: CostVector
    plan: PartitionPlan
    partitions: tuple[OverlapPartition | NonOverlapPartition, ...]

    def with_partitions(
        self, partitions: list[OverlapPartition | NonOverlapPartition]
    ) -> "PreparedRun":
        return replace(self, partitions=tuple(partitions))


def prepare_run(
    graph: Graph,
    p: int,
    engine: EngineKind | str,
    cost_kind: CostKind | str = CostKind.DPD,
    ordering: OrderKind | str = OrderKind.BY_DEGREE,
    seed: int = 0,
    dpd_all_neighbors: bool = False,
) -> PreparedRun:
    """Build order → eff → costs → plan → per-rank partitions for one engine."""
    engine = EngineKind.parse(engine)
    kind = CostKind.parse(cost_kind)
    order = compute_order(graph, ordering, seed=seed)
    eff = effective_adjacency(graph, order)
    costs = node_costs(graph, eff, kind, dpd_all_neighbors=dpd_all_neighbors)
    plan = compute_boundaries(costs, 1 if engine is EngineKind.SEQ else p)
    build = build_overlap_partition if engine.overlapping else build_nonoverlap_partition
    partitions = tuple(build(graph, eff, plan, i) for i in range(plan.p))
    rank_costs = plan.rank_costs(costs)
    logger.info(
        "Plan p=%d cost=%s boundaries=%s estimated max/mean=%.3f",
        plan.p,
        kind.value,
        list(plan.boundaries),
        imbalance(rank_costs),
    )
    return PreparedRun(engine, graph, eff, costs, plan, partitions)


def _run_sequential(prepared: PreparedRun, sink: TriangleSink | None) -> RankResult:
    (partition,) = prepared.partitions
    n = prepared.graph.n
    lists = tuple(partition.eff[v] for v in range(n))
    eff = EffectiveAdjacency(
        eff=lists,
        effdeg=np.fromiter((len(x) for x in lists), dtype=np.int64, count=n),
        order=prepared.eff.order,
    )
    triangles = count_node_iterator_n(eff, sink)
    # Merge bound Σ_v Σ_{u∈N_v}(d̂_v + d̂_u) over the lists actually counted.
    cost = sum(len(lists[v]) + len(lists[u]) for v in range(n) for u in lists[v])
    return RankResult(triangles, cost)


def execute_run(
    prepared: PreparedRun,
    mode: ExecutionMode | str | None = None,
    sink_factory: SinkFactory | None = None,
) -> RunReport:
    """Run the prepared partitions through the engine and collect the report."""
    engine = prepared.engine
    plan = prepared.plan
    sinks = [sink_factory(i) if sink_factory else None for i in range(plan.p)]
    estimated = plan.rank_costs(prepared.costs)

    if engine is EngineKind.SEQ:
        result = _run_sequential(prepared, sinks[0])
        per_rank = [RankStats(result.triangles, realized_cost=result.realized_cost, estimated_cost=estimated[0])]
        total = result.triangles
    else:
        runtime = Runtime(plan.p, mode)
        poll_every = config_int(Config, "POLL_EVERY_NODES", 1)

        def program(ctx: RankContext) -> Generator[Wait, None, tuple[RankResult, int | None]]:
            partition = prepared.partitions[ctx.rank]
            sink = sinks[ctx.rank]
            if engine is EngineKind.AOP:
                # Every partition is loaded before anyone counts.
                yield from ctx.collective.barrier(ctx)
                result = aop_count(partition, sink)
            elif engine is EngineKind.ANOP_DIRECT:
                result = yield from anop_direct_count(partition, ctx, sink, poll_every)
            else:
                result = yield from anop_surrogate_count(partition, ctx, sink, poll_every)
            reduced = yield from ctx.collective.reduce_sum(ctx, result.triangles, root=0)
            return result, reduced

        outcomes = runtime.run(program)
        total = outcomes[0][1]
        per_rank = [
            RankStats(
                triangles=r.triangles,
                data_sent=ctx.data_sent,
                data_received=ctx.data_received,
                control_received=ctx.control_received,
                realized_cost=r.realized_cost,
                estimated_cost=estimated[ctx.rank],
            )
            for (r, _), ctx in zip(outcomes, runtime.contexts)
        ]

    report = RunReport(
        engine=engine.value,
        p=plan.p,
        cost_kind=prepared.costs.kind.value,
        ordering=prepared.eff.order.kind.value,
        boundaries=plan.boundaries,
        total=total,
        per_rank=per_rank,
        sinks=sinks if sink_factory else [],
    )
    logger.info(
        "Engine %s finished: T=%d, data messages=%d", engine.value, report.total, report.data_messages
    )
    return report


def run_engine(
    graph: Graph,
    p: int,
    engine: EngineKind | str,
    cost_kind: CostKind | str = CostKind.DPD,
    ordering: OrderKind | str = OrderKind.BY_DEGREE,
    seed: int = 0,
    mode: ExecutionMode | str | None = None,
    sink_factory: SinkFactory | None = None,
    dpd_all_neighbors: bool = False,
) -> RunReport:
    """Count triangles of ``graph`` on p ranks with the given engine, cost kind and ordering."""
    prepared = prepare_run(graph, p, engine, cost_kind, ordering, seed, dpd_all_neighbors)
    return execute_run(prepared, mode=mode, sink_factory=sink_factory)


def aggregate_clustering(
    local: list[Counter[int]],
    graph: Graph,
    plan: PartitionPlan,
    mode: ExecutionMode | str | None = None,
) -> ClusteringResult:
    """Combine per-rank node tallies at the owning ranks and compute C_v.

    Rank i sends every other rank j one COUNTS message (possibly empty) listing the
    off-core nodes owned by j that have a nonzero tally at i.
    """
    if len(local) != plan.p:
        raise ProtocolError(f"got {len(local)} local tallies for {plan.p} ranks")

    def program(ctx: RankContext) -> Generator[Wait, None, dict[int, int]]:
        core = plan.core(ctx.rank)
        tallies = local[ctx.rank]
        outgoing: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for v, t in tallies.items():
            if t and v not in core:
                outgoing[plan.owner(v)].append((v, t))
        for j in range(ctx.p):
            if j == ctx.rank:
                continue
            pairs = sorted(outgoing.get(j, ()))
            ctx.send(
                j,
                Message.data(
                    ctx.rank,
                    MessageTag.COUNTS,
                    payload=[v for v, _ in pairs],
                    values=[t for _, t in pairs],
                ),
            )
        totals = {v: tallies.get(v, 0) for v in core}
        received = 0
        while True:
            for msg in ctx.drain():
                if msg.tag is not MessageTag.COUNTS:
                    raise ProtocolError(f"unexpected {msg.kind.value} message during aggregation")
                for v, t in zip(msg.payload, msg.values):
                    if v not in core:
                        raise ProtocolError(
                            f"rank {ctx.rank} received a count for node {v} outside its core"
                        )
                    totals[v] += t
                received += 1
            if received == ctx.p - 1:
                return totals
            yield ctx.wait_for_messages()

    tallies = np.zeros(graph.n, dtype=np.int64)
    for totals in Runtime(plan.p, mode).run(program):
        for v, t in totals.items():
            tallies[v] = t
    return ClusteringResult.from_tallies(tallies, graph.degrees)


def balance_report(
    graph: Graph,
    p: int,
    engine: EngineKind | str = EngineKind.AOP,
    ordering: OrderKind | str = OrderKind.BY_DEGREE,
    seed: int = 0,
    mode: ExecutionMode | str | None = None,
    cost_kinds: list[CostKind] | None = None,
) -> dict[str, Any]:
    """Estimated vs realized per-rank cost for each cost kind, plus partition storage."""
    engine = EngineKind.parse(engine)
    if engine is EngineKind.SEQ:
        raise UnknownEngineError("load balance needs a parallel engine")
    rows = []
    storage = None
    for kind in cost_kinds or list(CostKind):
        prepared = prepare_run(graph, p, engine, kind, ordering, seed)
        report = execute_run(prepared, mode=mode)
        estimated = [r.estimated_cost for r in report.per_rank]
        realized = [r.realized_cost for r in report.per_rank]
        rows.append(
            {
                "costKind": kind.value,
                "plan": list(prepared.plan.boundaries),
                "estimatedPerRank": estimated,
                "realizedPerRank": realized,
                "estimatedImbalance": round(imbalance(estimated), 6),
                "realizedImbalance": round(imbalance(realized), 6),
                "total": report.total,
            }
        )
        if storage is None:
            storage = partition_storage(graph, prepared.eff, prepared.plan)
    return {"engine": engine.value, "p": p, "kinds": rows, "storage": storage}
