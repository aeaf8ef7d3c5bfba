"""Undirected simple graphs and the banded k-nearest-neighbor platoon family.

Vehicles are vertices 0..n-1; a platoon P(n, k) links i and j whenever
0 < |i - j| <= k.  Edges are always kept in canonical form: (i, j) with
i < j, list sorted lexicographically.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GraphFormatError(ValueError):
    """A graph file or edge list violates the format contract."""


def _canonical_edges(n: int, edges) -> tuple[tuple[int, int], ...]:
    """Normalize an edge iterable to sorted (i, j) with i < j, checking
    self-loops, range, and duplicates (in either orientation)."""
    seen = set()
    out = []
    for e in edges:
        pair = tuple(e)
        if len(pair) != 2 or not all(isinstance(v, (int, np.integer)) for v in pair):
            raise GraphFormatError(f"edge {e!r} is not a pair of integers")
        a, b = int(pair[0]), int(pair[1])
        if a == b:
            raise GraphFormatError(f"self-loop [{a}, {b}] is not allowed")
        if not (0 <= a < n and 0 <= b < n):
            raise GraphFormatError(f"edge [{a}, {b}] out of range for n={n}")
        i, j = (a, b) if a < b else (b, a)
        if (i, j) in seen:
            raise GraphFormatError(f"duplicate edge [{a}, {b}]")
        seen.add((i, j))
        out.append((i, j))
    return tuple(sorted(out))


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph on vertices 0..n-1."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise GraphFormatError(f"vertex count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        canon = _canonical_edges(self.n, self.edges)
        object.__setattr__(self, "edges", canon)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        return cls(n, tuple(tuple(e) for e in edges))

    @property
    def m(self) -> int:
        """Number of edges."""
        return len(self.edges)

    @cached_property
    def _adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for i, j in self.edges:
            a[i, j] = 1
            a[j, i] = 1
        return a

    @cached_property
    def _neighbor_lists(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(v)) for v in nbrs)

    @cached_property
    def neighbor_bitmasks(self) -> tuple[int, ...]:
        """Per-vertex neighborhoods as bitmasks (bit j set iff j adjacent).

        Used by the exhaustive subset searches; cheap to keep on the graph.
        """
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    def has_edge(self, a: int, b: int) -> bool:
        i, j = (a, b) if a < b else (b, a)
        return bool(self._adjacency[i, j])


@dataclass(frozen=True)
class PlatoonSpec:
    """Parameters (n, k) of a k-nearest-neighbor platoon P(n, k)."""

    n: int
    k: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"platoon size must be a positive integer, got {self.n!r}")
        if not isinstance(self.k, (int, np.integer)) or not (1 <= self.k <= self.n - 1):
            raise ValueError(
                f"neighbor range k must satisfy 1 <= k <= n-1, got k={self.k!r} for n={self.n}"
            )
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))


def build_knn_platoon(spec: PlatoonSpec) -> Graph:
    """Build P(n, k): edge (i, j) iff 0 < |i - j| <= k."""
    n, k = spec.n, spec.k
    edges = [(i, j) for i in range(n) for j in range(i + 1, min(i + k, n - 1) + 1)]
    return Graph(n, tuple(edges))


def adjacency(g: Graph) -> np.ndarray:
    """Symmetric 0/1 adjacency matrix with zero diagonal (int64)."""
    return g._adjacency.copy()


def degrees(g: Graph) -> np.ndarray:
    """Vertex degrees (int64)."""
    return g._adjacency.sum(axis=1)


def laplacian(g: Graph) -> np.ndarray:
    """Graph Laplacian L = D - A (int64)."""
    a = g._adjacency
    return np.diag(a.sum(axis=1)) - a


def incidence(g: Graph) -> np.ndarray:
    """Oriented incidence matrix, n x m, columns in canonical edge order.

    For edge (i, j) with i < j the head is the smaller index: +1 at row i,
    -1 at row j.  Satisfies L = B @ B.T exactly in integer arithmetic.
    """
    b = np.zeros((g.n, g.m), dtype=np.int64)
    for e, (i, j) in enumerate(g.edges):
        b[i, e] = 1
        b[j, e] = -1
    return b


def neighbors(g: Graph, i: int) -> list[int]:
    """Sorted neighbor list of vertex i."""
    if not 0 <= i < g.n:
        raise ValueError(f"vertex {i} out of range for n={g.n}")
    return list(g._neighbor_lists[i])


def save_graph(g: Graph, path) -> None:
    """Write the canonical JSON form: {"n": ..., "edges": [[i, j], ...]}.

    Edges one per line, i < j, lexicographically sorted; UTF-8 with a
    trailing newline.
    """
    lines = [f"  \"n\": {g.n},"]
    if g.edges:
        lines.append("  \"edges\": [")
        body = ",\n".join(f"    [{i}, {j}]" for i, j in g.edges)
        lines.append(body)
        lines.append("  ]")
    else:
        lines.append("  \"edges\": []")
    text = "{\n" + "\n".join(lines) + "\n}\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _locate_line(text: str, a: int, b: int, occurrence: int = 1) -> int | None:
    """Best-effort line number of the `occurrence`-th appearance of [a, b]."""
    pat = re.compile(r"\[\s*%d\s*,\s*%d\s*\]" % (a, b))
    for count, match in enumerate(pat.finditer(text), start=1):
        if count == occurrence:
            return text.count("\n", 0, match.start()) + 1
    return None


def load_graph(path) -> Graph:
    """Read a JSON graph file, reporting offending line numbers on errors."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict) or "n" not in data or "edges" not in data:
        raise GraphFormatError(f"{path}: expected an object with 'n' and 'edges'")
    n = data["n"]
    if not isinstance(n, int) or n < 1:
        raise GraphFormatError(f"{path}: 'n' must be a positive integer, got {n!r}")
    raw = data["edges"]
    if not isinstance(raw, list):
        raise GraphFormatError(f"{path}: 'edges' must be a list")

    seen: set[tuple[int, int]] = set()
    raw_pairs: list[tuple[int, int]] = []
    for idx, e in enumerate(raw):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            raise GraphFormatError(f"{path}: edge #{idx} is not a pair of integers: {e!r}")
        a, b = e
        occ = 1 + sum(1 for p in raw_pairs if p == (a, b))
        where = _locate_line(text, a, b, occurrence=occ)
        loc = f" (line {where})" if where is not None else ""
        if a == b:
            raise GraphFormatError(f"{path}: self-loop [{a}, {b}]{loc}")
        if not (0 <= a < n and 0 <= b < n):
            raise GraphFormatError(f"{path}: edge [{a}, {b}] out of range for n={n}{loc}")
        i, j = (a, b) if a < b else (b, a)
        if (i, j) in seen:
            raise GraphFormatError(f"{path}: duplicate edge [{a}, {b}]{loc}")
        seen.add((i, j))
        raw_pairs.append((a, b))
    return Graph(n, tuple(sorted(seen)))
