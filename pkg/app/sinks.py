"""Triangle sinks: consumers of the (v, u, w) triples emitted by the counting kernels.

Kernels call ``sink.emit(v, u, w)`` once per distinct triangle, where v is the ≺-smallest
apex and u the middle one. Passing no sink means count only.
"""
from collections import Counter
from typing import Protocol


class TriangleSink(Protocol):
    def emit(self, v: int, u: int, w: int) -> None: ...


class CountingSink:
    """Counter-only sink."""

    def __init__(self) -> None:
        self.count = 0

    def emit(self, v: int, u: int, w: int) -> None:
        self.count += 1


class NodeTallySink:
    """Per-node tally T_v: every triangle adds one to each of its three nodes."""

    def __init__(self) -> None:
        self.tallies: Counter[int] = Counter()

    def emit(self, v: int, u: int, w: int) -> None:
        tallies = self.tallies
        tallies[v] += 1
        tallies[u] += 1
        tallies[w] += 1

    def as_list(self, n: int) -> list[int]:
        return [self.tallies.get(v, 0) for v in range(n)]


def canonical_edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


class EdgeTallySink:
    """Per-edge tally t_e keyed by the canonical (min, max) pair."""

    def __init__(self) -> None:
        self.tallies: Counter[tuple[int, int]] = Counter()

    def emit(self, v: int, u: int, w: int) -> None:
        tallies = self.tallies
        tallies[canonical_edge(v, u)] += 1
        tallies[canonical_edge(v, w)] += 1
        tallies[canonical_edge(u, w)] += 1


class ListingSink:
    """Collects triangles as ID-sorted triples for "u v w" output."""

    def __init__(self) -> None:
        self.triangles: list[tuple[int, int, int]] = []

    def emit(self, v: int, u: int, w: int) -> None:
        a, b, c = sorted((v, u, w))
        self.triangles.append((a, b, c))

    def __len__(self) -> int:
        return len(self.triangles)

    def lines(self, sort_output: bool = False) -> list[str]:
        """One "u v w" line (u < v < w) per triangle, optionally in lexicographic order."""
        triangles = sorted(self.triangles) if sort_output else self.triangles
        return [f"{a} {b} {c}\n" for a, b, c in triangles]

