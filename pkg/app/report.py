"""Run results: per-rank statistics, the run report and clustering coefficients."""
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from config.config import Config


@dataclass(frozen=True)
class RankStats:
    triangles: int
    data_sent: int = 0
    data_received: int = 0
    control_received: int = 0
    realized_cost: int = 0
    estimated_cost: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "T": self.triangles,
            "dataSent": self.data_sent,
            "dataRecv": self.data_received,
            "controlRecv": self.control_received,
            "realizedCost": self.realized_cost,
            "estimatedCost": self.estimated_cost,
        }


def imbalance(values: list[int]) -> float:
    """max / mean of per-rank values; 1.0 for an all-zero or empty list."""
    if not values:
        return 1.0
    mean = sum(values) / len(values)
    return max(values) / mean if mean else 1.0


@dataclass
class RunReport:
    """Outcome of one engine run.

    ``total`` is the sum reduced at rank 0. ``sinks`` holds the per-rank sinks and is never
    serialized.
    """

    engine: str
    p: int
    cost_kind: str
    ordering: str
    boundaries: tuple[int, ...]
    total: int
    per_rank: list[RankStats]
    sinks: list[Any] = field(default_factory=list, repr=False)

    @property
    def data_messages(self) -> int:
        return sum(r.data_sent for r in self.per_rank)

    def to_dict(self) -> dict[str, Any]:
        return {
            "engine": self.engine,
            "p": self.p,
            "costKind": self.cost_kind,
            "ordering": self.ordering,
            "total": self.total,
            "plan": list(self.boundaries),
            "dataMessages": self.data_messages,
            "realizedImbalance": round(imbalance([r.realized_cost for r in self.per_rank]), 6),
            "perRank": [r.to_dict() for r in self.per_rank],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=Config.JSON_INDENT)


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    """Per-node triangle tallies T_v and clustering coefficients C_v."""

    tallies: np.ndarray
    coefficients: np.ndarray

    @classmethod
    def from_tallies(cls, tallies: np.ndarray, degrees: np.ndarray) -> "ClusteringResult":
        t = np.asarray(tallies, dtype=np.int64)
        d = np.asarray(degrees, dtype=np.int64)
        pairs = d * (d - 1)
        c = np.zeros(t.size, dtype=np.float64)
        mask = d >= 2
        c[mask] = 2.0 * t[mask] / pairs[mask]
        return cls(tallies=t, coefficients=c)

    @property
    def mean(self) -> float:
        return float(self.coefficients.mean()) if self.coefficients.size else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "v": np.arange(self.tallies.size, dtype=np.int64),
                "T": self.tallies,
                "C": self.coefficients,
            }
        )

    def to_lines(self) -> str:
        """One "v T_v C_v" line per node."""
        return "".join(
            f"{v} {t} {c!r}\n"
            for v, t, c in zip(
                range(self.tallies.size), self.tallies.tolist(), self.coefficients.tolist()
            )
        )
