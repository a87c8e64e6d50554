"""Command-line run configuration and its consistency checks."""
import argparse
from dataclasses import dataclass, fields

from app.engines import EngineKind
from app.graph import OrderKind
from app.partitioner import CostKind

COMMANDS = ("count", "list", "cc", "approx", "stats", "bench", "balance", "popt")
GRAPH_COMMANDS = frozenset(COMMANDS) - {"popt"}
GENERATORS = ("gnp", "pa")


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation. None means the flag was not given."""

    command: str
    input_path: str | None = None
    gen: str | None = None
    n: int | None = None
    d: float | None = None
    seed: int | None = None
    engine: str | None = None
    ranks: int | None = None
    balance: str | None = None
    ordering: str | None = None
    q: float | None = None
    runs: int | None = None
    out: str | None = None
    plan_out: str | None = None
    sorted_output: bool = False
    pretty: bool = False
    timings: bool = False
    base_n: float | None = None
    base_d: float | None = None
    base_p: float | None = None

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        values = vars(ns)
        return cls(**{f.name: values[f.name] for f in fields(cls) if f.name in values})


def validate_run_config(cfg: RunConfig) -> tuple[bool, str]:
    """Check that the flags given make sense together for the command.

    Returns:
        (True, "") if consistent; (False, "CODE:detail") otherwise.
    """
    if cfg.command not in COMMANDS:
        return False, f"UNKNOWN_COMMAND:{cfg.command}"

    if cfg.command in GRAPH_COMMANDS:
        if cfg.input_path and cfg.gen:
            return False, "INPUT_CONFLICT:--input and --gen are exclusive"
        if not cfg.input_path and not cfg.gen:
            return False, "MISSING_INPUT:--input or --gen is required"
        if cfg.gen:
            if cfg.gen not in GENERATORS:
                return False, f"INVALID_GENERATOR:{cfg.gen}"
            if cfg.n is None or cfg.d is None:
                return False, "GEN_PARAMS:--gen needs --n and --d"
            if cfg.n < 0 or cfg.d < 0:
                return False, f"GEN_PARAMS:n={cfg.n},d={cfg.d}"
            if cfg.gen == "pa" and (cfg.d != int(cfg.d) or int(cfg.d) % 2 or cfg.d < 2):
                return False, f"GEN_PARAMS:pa needs an even integer d >= 2, got {cfg.d}"
        elif cfg.n is not None or cfg.d is not None:
            return False, "GEN_PARAMS:--n/--d only with --gen"

    if cfg.engine is not None and cfg.engine not in {e.value for e in EngineKind}:
        return False, f"INVALID_ENGINE:{cfg.engine}"
    if cfg.balance is not None and cfg.balance.upper() not in {c.value for c in CostKind}:
        return False, f"INVALID_BALANCE:{cfg.balance}"
    if cfg.ordering is not None and cfg.ordering not in {o.value for o in OrderKind}:
        return False, f"INVALID_ORDERING:{cfg.ordering}"
    if cfg.ranks is not None and cfg.ranks < 1:
        return False, f"INVALID_RANKS:{cfg.ranks}"

    if cfg.command != "approx":
        if cfg.q is not None:
            return False, "Q_ONLY_WITH_APPROX"
        if cfg.runs is not None:
            return False, "RUNS_ONLY_WITH_APPROX"
    else:
        if cfg.q is not None and not 0.0 < cfg.q <= 1.0:
            return False, f"INVALID_Q:{cfg.q}"
        if cfg.runs is not None and cfg.runs < 1:
            return False, f"INVALID_RUNS:{cfg.runs}"

    if cfg.sorted_output and cfg.command != "list":
        return False, "SORTED_ONLY_WITH_LIST"
    if cfg.plan_out and cfg.command != "count":
        return False, "PLAN_OUT_ONLY_WITH_COUNT"
    if cfg.timings and cfg.command != "bench":
        return False, "TIMINGS_ONLY_WITH_BENCH"
    if cfg.command == "balance" and cfg.engine == EngineKind.SEQ.value:
        return False, "INVALID_ENGINE:balance needs a parallel engine"

    if cfg.command == "popt":
        for name in ("n", "d", "base_n", "base_d", "base_p"):
            value = getattr(cfg, name)
            if value is None:
                return False, f"POPT_PARAMS:--{name.replace('_', '-')} is required"
            if value <= 0:
                return False, f"POPT_PARAMS:{name}={value}"
    elif any(v is not None for v in (cfg.base_n, cfg.base_d, cfg.base_p)):
        return False, "POPT_PARAMS:--base-* only with popt"

    return True, ""
