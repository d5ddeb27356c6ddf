"""Directed graph model, edge-list I/O and hop-distance primitives."""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

INF_HOPS = math.inf


class GraphFormatError(ValueError):
    """Malformed edge-list or label file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NegativeWeightError(GraphFormatError):
    pass


class DuplicateEdgeError(GraphFormatError):
    pass


class DiGraph:
    """Immutable simple digraph on nodes ``0..n-1`` with non-negative weights.

    Edges are stored in insertion order as parallel ``src``/``dst``/``weight``
    arrays; ``edge_index`` maps ``(u, v)`` to the position in those arrays.
    """

    __slots__ = ("n", "src", "dst", "weight", "edge_index", "_out", "_in", "labels")

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        labels: Sequence[str] | None = None,
    ):
        if n < 0:
            raise ValueError("node count must be non-negative")
        self.n = int(n)
        src, dst, wts = [], [], []
        index: dict[tuple[int, int], int] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has a node outside [0, {n})")
            if not w >= 0.0:
                raise NegativeWeightError(f"edge ({u}, {v}) has negative weight {w}")
            if (u, v) in index:
                raise DuplicateEdgeError(f"duplicate edge ({u}, {v})")
            index[(u, v)] = len(src)
            src.append(u)
            dst.append(v)
            wts.append(w)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.weight = np.asarray(wts, dtype=np.float64)
        for arr in (self.src, self.dst, self.weight):
            arr.setflags(write=False)
        self.edge_index = index
        out: list[list[int]] = [[] for _ in range(n)]
        inn: list[list[int]] = [[] for _ in range(n)]
        for u, v in zip(src, dst):
            out[u].append(v)
            inn[v].append(u)
        self._out = tuple(tuple(sorted(a)) for a in out)
        self._in = tuple(tuple(sorted(a)) for a in inn)
        if labels is not None and len(labels) != n:
            raise ValueError("label count must equal node count")
        self.labels = tuple(labels) if labels is not None else None

    @property
    def m(self) -> int:
        return len(self.src)

    def __repr__(self) -> str:
        return f"DiGraph(n={self.n}, m={self.m})"

    def successors(self, u: int) -> tuple[int, ...]:
        return self._out[u]

    def predecessors(self, v: int) -> tuple[int, ...]:
        return self._in[v]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edge_index

    def w(self, u: int, v: int) -> float:
        return float(self.weight[self.edge_index[(u, v)]])

    def edges(self) -> Iterator[tuple[int, int, float]]:
        for u, v, w in zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()):
            yield u, v, w

    def edge_set(self) -> set[tuple[int, int, float]]:
        return set(self.edges())

    def with_weights(self, weights) -> "DiGraph":
        """Same topology (and edge order) with a new weight vector."""
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (self.m,):
            raise ValueError("weight vector must have one entry per edge")
        return DiGraph(
            self.n,
            zip(self.src.tolist(), self.dst.tolist(), weights.tolist()),
            labels=self.labels,
        )

    def transpose(self) -> "DiGraph":
        return DiGraph(self.n, ((v, u, w) for u, v, w in self.edges()), labels=self.labels)

    def subgraph(self, nodes: Sequence[int]) -> tuple["DiGraph", np.ndarray]:
        """Induced subgraph relabelled to ``0..len(nodes)-1``.

        Returns the subgraph and the array mapping new ids to old ids.
        """
        kept = np.asarray(sorted(set(int(v) for v in nodes)), dtype=np.int64)
        local = {int(v): i for i, v in enumerate(kept)}
        edges = [
            (local[u], local[v], w)
            for u, v, w in self.edges()
            if u in local and v in local
        ]
        labels = [self.labels[v] for v in kept] if self.labels is not None else None
        return DiGraph(len(kept), edges, labels=labels), kept

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Out-adjacency in CSR form (targets sorted per row): indptr, indices, weights."""
        order = np.lexsort((self.dst, self.src))
        indices = self.dst[order].astype(np.int32)
        weights = self.weight[order].astype(np.float64)
        counts = np.bincount(self.src, minlength=self.n) if self.m else np.zeros(self.n, np.int64)
        indptr = np.zeros(self.n + 1, dtype=np.int32)
        np.cumsum(counts, out=indptr[1:])
        return indptr, indices, weights

    def weight_matrix(self, missing: float = 0.0) -> np.ndarray:
        mat = np.full((self.n, self.n), missing, dtype=np.float64)
        if self.m:
            mat[self.src, self.dst] = self.weight
        return mat

    def out_strength(self) -> np.ndarray:
        return np.bincount(self.src, weights=self.weight, minlength=self.n).astype(float)

    def in_strength(self) -> np.ndarray:
        return np.bincount(self.dst, weights=self.weight, minlength=self.n).astype(float)

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    @classmethod
    def from_matrix(cls, matrix, keep_zero: bool = False) -> "DiGraph":
        """Build from a square weight matrix; zero cells are absent unless ``keep_zero``.

        With ``keep_zero`` every off-diagonal cell becomes an edge.
        """
        mat = np.asarray(matrix, dtype=float)
        n = mat.shape[0]
        edges = []
        for i in range(n):
            for j in range(n):
                if mat[i, j] != 0 or (keep_zero and i != j):
                    edges.append((i, j, mat[i, j]))
        return cls(n, edges)


@dataclass(frozen=True)
class Cycle:
    """Simple directed cycle ``nodes[0] -> nodes[1] -> ... -> nodes[0]``."""

    nodes: tuple[int, ...]

    def __init__(self, nodes: Iterable[int]):
        object.__setattr__(self, "nodes", tuple(int(v) for v in nodes))

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[int]:
        return iter(self.nodes)

    def edges(self) -> list[tuple[int, int]]:
        k = len(self.nodes)
        return [(self.nodes[i], self.nodes[(i + 1) % k]) for i in range(k)]

    def canonical(self) -> "Cycle":
        """Rotation starting at the smallest node id."""
        if not self.nodes:
            return self
        i = self.nodes.index(min(self.nodes))
        return Cycle(self.nodes[i:] + self.nodes[:i])


def validate_cycle(graph: DiGraph, nodes: Iterable[int]) -> bool:
    nodes = list(nodes.nodes if isinstance(nodes, Cycle) else nodes)
    if not nodes or len(set(nodes)) != len(nodes):
        return False
    if any(not (0 <= v < graph.n) for v in nodes):
        return False
    k = len(nodes)
    return all(graph.has_edge(nodes[i], nodes[(i + 1) % k]) for i in range(k))


def bfs_hops(graph: DiGraph, source: int, reversed: bool = False) -> list[float]:
    """Unweighted hop distance from ``source`` (to ``source`` when ``reversed``)."""
    if not 0 <= source < graph.n:
        raise ValueError(f"source {source} outside [0, {graph.n})")
    step = graph.predecessors if reversed else graph.successors
    dist: list[float] = [INF_HOPS] * graph.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in step(u):
            if dist[v] == INF_HOPS:
                dist[v] = du
                queue.append(v)
    return dist


# ---------------------------------------------------------------- edge-list I/O


_HEADER_N = re.compile(r"n=(\d+)")


def _split(line: str) -> list[str]:
    return line.split("\t") if "\t" in line else line.split()


def load_edge_list(
    path: str | Path,
    integer_ids: bool = True,
    labels_path: str | Path | None = None,
    allow_self_loops: bool = True,
) -> DiGraph:
    """Read ``src<TAB>dst<TAB>weight`` lines (``#`` starts a comment).

    With ``integer_ids`` node ids are parsed as integers and ``n`` is the
    largest id plus one; otherwise tokens are labels numbered by first
    appearance.
    """
    edges: list[tuple[int, int, float]] = []
    seen: dict[tuple[int, int], int] = {}
    names: dict[str, int] = {}
    declared_n = 0

    def node(tok: str, lineno: int) -> int:
        if integer_ids:
            try:
                v = int(tok)
            except ValueError:
                raise GraphFormatError(f"node id {tok!r} is not an integer", lineno) from None
            if v < 0:
                raise GraphFormatError(f"negative node id {v}", lineno)
            return v
        return names.setdefault(tok, len(names))

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line, _, comment = raw.partition("#")
            line = line.strip()
            if not line:
                header = _HEADER_N.match(comment.strip())
                if header:
                    declared_n = int(header.group(1))
                continue
            parts = [p.strip() for p in _split(line)]
            if len(parts) != 3:
                raise GraphFormatError(f"expected 3 fields, got {len(parts)}", lineno)
            u, v = node(parts[0], lineno), node(parts[1], lineno)
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"weight {parts[2]!r} is not a number", lineno) from None
            if not math.isfinite(w):
                raise GraphFormatError(f"weight {parts[2]!r} is not finite", lineno)
            if w < 0:
                raise NegativeWeightError(f"negative weight {w}", lineno)
            if (u, v) in seen:
                raise DuplicateEdgeError(
                    f"duplicate edge ({parts[0]}, {parts[1]}), first on line {seen[(u, v)]}", lineno
                )
            if u == v and not allow_self_loops:
                continue
            seen[(u, v)] = lineno
            edges.append((u, v, w))

    if integer_ids:
        n = max(declared_n, 1 + max((max(u, v) for u, v, _ in edges), default=-1))
        labels = None
    else:
        n = len(names)
        labels = list(names)
    if labels_path is not None:
        labels = load_labels(labels_path, n)
    return DiGraph(n, edges, labels=labels)


def load_labels(path: str | Path, n: int) -> list[str]:
    labels = [str(i) for i in range(n)]
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise GraphFormatError("expected id<TAB>label", lineno)
            try:
                i = int(parts[0])
            except ValueError:
                raise GraphFormatError(f"node id {parts[0]!r} is not an integer", lineno) from None
            if not 0 <= i < n:
                raise GraphFormatError(f"node id {i} outside [0, {n})", lineno)
            labels[i] = parts[1]
    return labels


def save_edge_list(graph: DiGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={graph.n} m={graph.m}\n")
        for u, v, w in graph.edges():
            fh.write(f"{u}\t{v}\t{w!r}\n")
