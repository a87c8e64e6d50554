"""Command-line front end: count, list, cc, approx, stats, bench, balance and popt.

Output is JSON (``--pretty`` renders tables instead). Exit codes: 0 success, 2 usage
error, 1 runtime failure.
"""
import argparse
import json
import logging
import math
import sys
from collections.abc import Sequence
from typing import Any

import pandas as pd

from app import TrigraphError, result_writer
from app.edge_list import read_edge_list
from app.engines import EngineKind, aggregate_clustering, balance_report, run_engine
from app.generators import gen_gnp, gen_pa
from app.graph import Graph, OrderKind, compute_order, effective_adjacency
from app.logger import log_status, setup_logging
from app.partitioner import PartitionError, PartitionPlan
from app.run_config import COMMANDS, GENERATORS, RunConfig, validate_run_config
from app.sequential import compare_sequential
from app.sinks import ListingSink, NodeTallySink
from app.sparsify import approx_report, variance_report
from config.config import Config
from config.validation import ConfigValidationError, validate_config

logger = logging.getLogger("trigraph")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def estimate_p_opt(n: float, dbar: float, base: tuple[float, float, float]) -> int:
    """Scale a known optimal rank count to another graph: p'·(d̄/d̄')·√(n/n')."""
    base_n, base_d, base_p = base
    if min(n, dbar, base_n, base_d, base_p) <= 0:
        raise PartitionError(f"p_opt inputs must be positive: n={n}, d={dbar}, base={base}")
    return math.floor(base_p * (dbar / base_d) * math.sqrt(n / base_n) + 0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trigraph", description="Exact and approximate triangle counting on p ranks."
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", dest="input_path", help="Edge-list file")
    parser.add_argument("--gen", choices=GENERATORS, help="Generate the graph instead")
    parser.add_argument("--n", type=int, help="Node count (generator or popt target)")
    parser.add_argument("--d", type=float, help="Average degree (generator or popt target)")
    parser.add_argument("--seed", type=int, help=f"Seed (default {Config.DEFAULT_SEED})")
    parser.add_argument("--engine", help="seq, aop, anop-direct or anop-surrogate")
    parser.add_argument("--ranks", type=int, help="Rank count P")
    parser.add_argument("--balance", help="Cost kind: N, D, DH, DDH, DH2, DPD or NOV")
    parser.add_argument("--ordering", help="id, degree, random or coreness")
    parser.add_argument("--q", type=float, help="Edge retention probability (approx)")
    parser.add_argument("--runs", type=int, help="Seeded estimates (approx)")
    parser.add_argument("--out", help="Write the result here instead of stdout")
    parser.add_argument("--plan-out", dest="plan_out", help="Save the partition plan as JSON (count)")
    parser.add_argument("--sorted", dest="sorted_output", action="store_true", help="Sort listed triangles")
    parser.add_argument("--pretty", action="store_true", help="Human-readable tables")
    parser.add_argument(
        "--timings", action="store_true", help="bench: add wall-clock seconds (output no longer reproducible)"
    )
    parser.add_argument("--base-n", dest="base_n", type=float, help="popt: base node count")
    parser.add_argument("--base-d", dest="base_d", type=float, help="popt: base average degree")
    parser.add_argument("--base-p", dest="base_p", type=float, help="popt: base optimal rank count")
    return parser


def load_graph(cfg: RunConfig) -> Graph:
    seed = cfg.seed if cfg.seed is not None else Config.DEFAULT_SEED
    if cfg.gen == "gnp":
        graph = gen_gnp(cfg.n, cfg.d, seed)
    elif cfg.gen == "pa":
        graph = gen_pa(cfg.n, int(cfg.d), seed)
    else:
        return read_edge_list(cfg.input_path)
    logger.info("Generated %s graph: n=%d, m=%d", cfg.gen, graph.n, graph.m)
    return graph


def _run_args(cfg: RunConfig) -> dict[str, Any]:
    return {
        "p": cfg.ranks if cfg.ranks is not None else Config.DEFAULT_RANKS,
        "engine": cfg.engine or Config.DEFAULT_ENGINE,
        "cost_kind": cfg.balance or Config.DEFAULT_COST_KIND,
        "ordering": cfg.ordering or Config.DEFAULT_ORDERING,
        "seed": cfg.seed if cfg.seed is not None else Config.DEFAULT_SEED,
    }


def degree_summary(graph: Graph) -> dict[str, float]:
    described = pd.Series(graph.degrees, dtype="float64").describe()
    if not graph.n:
        return {"min": 0.0, "max": 0.0, "mean": 0.0, "median": 0.0, "std": 0.0}
    return {
        "min": float(described["min"]),
        "max": float(described["max"]),
        "mean": float(described["mean"]),
        "median": float(described["50%"]),
        "std": 0.0 if pd.isna(described["std"]) else float(described["std"]),
    }


def cmd_count(cfg: RunConfig) -> dict[str, Any]:
    graph = load_graph(cfg)
    report = run_engine(graph, **_run_args(cfg))
    if cfg.plan_out:
        result_writer.write_text(cfg.plan_out, PartitionPlan(report.boundaries).to_json() + "\n")
    return report.to_dict()


def cmd_list(cfg: RunConfig) -> list[str]:
    graph = load_graph(cfg)
    report = run_engine(graph, sink_factory=lambda _: ListingSink(), **_run_args(cfg))
    merged = ListingSink()
    for sink in report.sinks:
        merged.triangles.extend(sink.triangles)
    return merged.lines(sort_output=cfg.sorted_output)


def cmd_cc(cfg: RunConfig) -> tuple[str, dict[str, Any]]:
    graph = load_graph(cfg)
    args = _run_args(cfg)
    report = run_engine(graph, sink_factory=lambda _: NodeTallySink(), **args)
    plan = PartitionPlan(report.boundaries)
    result = aggregate_clustering([s.tallies for s in report.sinks], graph, plan)
    summary = {
        "engine": report.engine,
        "p": report.p,
        "n": graph.n,
        "total": report.total,
        "meanCC": result.mean,
        "ccSummary": {
            k: float(v) for k, v in result.to_frame()["C"].describe().fillna(0.0).items()
        },
    }
    return result.to_lines(), summary


def cmd_approx(cfg: RunConfig) -> dict[str, Any]:
    graph = load_graph(cfg)
    args = _run_args(cfg)
    return approx_report(
        graph,
        args["p"],
        args["engine"],
        q=cfg.q if cfg.q is not None else Config.DEFAULT_Q,
        runs=cfg.runs if cfg.runs is not None else Config.DEFAULT_APPROX_RUNS,
        seed=args["seed"],
        cost_kind=args["cost_kind"],
        ordering=args["ordering"],
    )


def cmd_stats(cfg: RunConfig) -> dict[str, Any]:
    graph = load_graph(cfg)
    eff = effective_adjacency(graph, compute_order(graph, OrderKind.BY_DEGREE))
    whole = PartitionPlan((0, graph.n))
    variance = variance_report(graph, whole, 1.0, eff=eff)
    total = variance.triangles
    return {
        "n": graph.n,
        "m": graph.m,
        "T": total,
        "NTC": total / graph.n if graph.n else 0.0,
        "k": variance.k,
        "degree": degree_summary(graph),
    }


def cmd_bench(cfg: RunConfig) -> dict[str, Any]:
    graph = load_graph(cfg)
    return compare_sequential(graph, seed=_run_args(cfg)["seed"], timings=cfg.timings)


def cmd_balance(cfg: RunConfig) -> dict[str, Any]:
    graph = load_graph(cfg)
    args = _run_args(cfg)
    engine = cfg.engine or EngineKind.AOP.value
    return balance_report(graph, args["p"], engine, args["ordering"], args["seed"])


def cmd_popt(cfg: RunConfig) -> dict[str, Any]:
    p_opt = estimate_p_opt(cfg.n, cfg.d, (cfg.base_n, cfg.base_d, cfg.base_p))
    return {
        "n": cfg.n,
        "d": cfg.d,
        "base": {"n": cfg.base_n, "d": cfg.base_d, "p": cfg.base_p},
        "pOpt": p_opt,
    }


def render_pretty(payload: Any, indent: int = 0) -> str:
    """Plain-text rendering: scalars as "key: value", lists of records as tables."""
    pad = " " * indent
    if isinstance(payload, list) and payload and all(isinstance(x, dict) for x in payload):
        table = pd.DataFrame(payload).to_string(index=False)
        return "\n".join(pad + line for line in table.splitlines())
    if not isinstance(payload, dict):
        return pad + str(payload)
    lines = []
    for key, value in payload.items():
        if isinstance(value, (dict, list)) and value and not all(
            isinstance(x, (int, float)) for x in value
        ):
            lines.append(f"{pad}{key}:")
            lines.append(render_pretty(value, indent + 2))
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(lines)


def _emit(cfg: RunConfig, payload: Any) -> None:
    if cfg.pretty:
        text = render_pretty(payload) + "\n"
    else:
        text = json.dumps(payload, indent=Config.JSON_INDENT) + "\n"
    if cfg.out:
        result_writer.write_text(cfg.out, text)
    else:
        sys.stdout.write(text)


def dispatch(cfg: RunConfig) -> None:
    if cfg.command == "list":
        lines = cmd_list(cfg)
        if cfg.out:
            result_writer.write_lines(cfg.out, lines)
            sys.stdout.write(json.dumps({"total": len(lines), "out": cfg.out}) + "\n")
        else:
            sys.stdout.writelines(lines)
        return
    if cfg.command == "cc":
        lines, summary = cmd_cc(cfg)
        if cfg.out:
            result_writer.write_text(cfg.out, lines)
            summary["out"] = cfg.out
            payload = render_pretty(summary) if cfg.pretty else json.dumps(summary, indent=Config.JSON_INDENT)
            sys.stdout.write(payload + "\n")
        else:
            sys.stdout.write(lines)
        return
    handlers = {
        "count": cmd_count,
        "approx": cmd_approx,
        "stats": cmd_stats,
        "bench": cmd_bench,
        "balance": cmd_balance,
        "popt": cmd_popt,
    }
    _emit(cfg, handlers[cfg.command](cfg))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    cfg = RunConfig.from_namespace(ns)
    ok, detail = validate_run_config(cfg)
    if not ok:
        sys.stderr.write(f"trigraph: usage error: {detail}\n")
        return EXIT_USAGE

    setup_logging()
    try:
        validate_config()
    except ConfigValidationError as e:
        log_status(f"Configuration invalid: {e}", "error")
        sys.stderr.write(f"trigraph: configuration error: {e}\n")
        return EXIT_FAILURE
    log_status(Config.get_info())

    try:
        dispatch(cfg)
        if not result_writer.flush():
            sys.stderr.write("trigraph: failed to write result files\n")
            return EXIT_FAILURE
    except (TrigraphError, OSError) as e:
        log_status(f"{cfg.command} failed: {e}", "error")
        sys.stderr.write(f"trigraph: {e}\n")
        return EXIT_FAILURE
    return EXIT_OK
