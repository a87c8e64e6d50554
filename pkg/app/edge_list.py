"""Edge-list text ingestion and serialization (the only on-disk graph format).

One edge per line as two whitespace-separated decimal node IDs; lines starting with
'#' and blank lines are ignored.
"""
import io
import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd

from app import TrigraphError
from app.graph import Graph, build_graph

logger = logging.getLogger("trigraph")


class EdgeListParseError(TrigraphError, ValueError):
    """Raised for a line that is not two non-negative integer tokens."""

    def __init__(self, line_number: int, line: str, detail: str = "") -> None:
        self.line_number = line_number
        self.line = line
        msg = f"line {line_number}: cannot parse edge {line!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def parse_edge_list(text: str) -> list[tuple[int, int]]:
    """Parse edge-list text into (u, v) pairs in file order.

    Raises:
        EdgeListParseError: On the first malformed line (1-based line number).
    """
    edges: list[tuple[int, int]] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_number, raw, f"expected 2 tokens, got {len(tokens)}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(line_number, raw, "non-integer token") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(line_number, raw, "negative node ID")
        edges.append((u, v))
    return edges


def write_edge_list(graph: Graph) -> str:
    """Serialize each undirected edge once as 'u v' (u < v), newline-terminated."""
    return "".join(f"{u} {v}\n" for u, v in graph.edges())


# A '#' anywhere but at the start of a line (after optional blanks).
_TRAILING_COMMENT = re.compile(rb"(?m)^[ \t\f\v\r]*[^#\s][^\n]*#")


def _decode_lines(data: bytes) -> str:
    """Decode file bytes line by line so an encoding error names its line."""
    lines = []
    for line_number, raw in enumerate(data.splitlines(), start=1):
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError:
            raise EdgeListParseError(
                line_number, raw.decode("utf-8", errors="replace"), "invalid UTF-8"
            ) from None
    return "\n".join(lines)


def read_edge_list(path: str | Path, n: int | None = None) -> Graph:
    """Load a graph from an edge-list file.

    Well-formed files go through pandas' C parser; anything it rejects, and any line with
    a trailing '#', is re-parsed line by line so the error names the offending line.
    """
    path = Path(path)
    data = path.read_bytes()
    try:
        if _TRAILING_COMMENT.search(data):
            raise ValueError("'#' after an edge")
        df = pd.read_csv(
            io.BytesIO(data),
            sep=r"\s+",
            comment="#",
            header=None,
            dtype=np.int64,
            engine="c",
            encoding="utf-8",
        )
        if df.shape[1] != 2:
            raise ValueError(f"expected 2 columns, got {df.shape[1]}")
        edges = df.to_numpy(dtype=np.int64)
        if edges.size and edges.min() < 0:
            raise ValueError("negative node ID")
    except pd.errors.EmptyDataError:
        edges = np.zeros((0, 2), dtype=np.int64)
    except (ValueError, pd.errors.ParserError):
        edges = parse_edge_list(_decode_lines(data))
    graph = build_graph(edges, n=n)
    logger.info("Loaded %s: n=%d, m=%d", path, graph.n, graph.m)
    return graph


def save_edge_list(graph: Graph, path: str | Path) -> None:
    Path(path).write_text(write_edge_list(graph), encoding="utf-8")
