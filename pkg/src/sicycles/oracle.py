"""Exhaustive reference solvers and instance generators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .graph import Cycle, DiGraph
from .interestingness import ICDLParams, best_ratio_by_length

DEFAULT_MAX_CYCLES = 10_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(f"cycle enumeration exceeded its budget of {count} cycles")


@dataclass(frozen=True)
class EnumerationBudget:
    max_cycles: int = DEFAULT_MAX_CYCLES

    def __post_init__(self):
        if self.max_cycles <= 0:
            raise ValueError("max_cycles must be positive")


def enumerate_cycles(graph: DiGraph, budget: EnumerationBudget | None = None) -> Iterator[Cycle]:
    """Every simple cycle exactly once, rotated to start at its smallest node."""
    budget = budget or EnumerationBudget()
    indptr, indices, _ = graph.csr()
    count = 0
    for batch in kernels.johnson_cycles(graph.n, indptr, indices, 4096):
        for nodes in batch:
            count += 1
            if count > budget.max_cycles:
                raise BudgetExceeded(budget.max_cycles)
            yield Cycle(nodes)


@dataclass
class CycleProfile:
    """Heaviest cycle of each length, unconstrained and per terminal set.

    ``best_weight[r, L]`` is ``-inf`` when no cycle of length ``L`` qualifies;
    row 0 is unconstrained and row ``r`` covers ``terminal_sets[r - 1]``.
    """

    count: int
    best_weight: np.ndarray
    best_nodes: np.ndarray
    terminal_sets: tuple[frozenset[int], ...]

    def best(self, p: ICDLParams, row: int = 0) -> tuple[Cycle, float] | None:
        f, length = best_ratio_by_length(self.best_weight[row], p)
        if length == 0:
            return None
        return Cycle(self.best_nodes[row, length, :length].tolist()), f

    def max_mean(self) -> float | None:
        lengths = np.arange(self.best_weight.shape[1])
        w = self.best_weight[0, 1:]
        if not np.isfinite(w).any():
            return None
        return float(np.max(w / lengths[1:]))


def _masks(graph: DiGraph, terminal_sets) -> np.ndarray:
    out = []
    for ts in terminal_sets:
        m = 0
        for v in ts:
            if not 0 <= v < graph.n:
                raise ValueError(f"terminal {v} outside [0, {graph.n})")
            m |= 1 << int(v)
        out.append(m)
    return np.array(out, dtype=np.uint64)


def cycle_profile(
    sg: DiGraph,
    terminal_sets: Sequence[Sequence[int]] = (),
    budget: EnumerationBudget | None = None,
) -> CycleProfile:
    budget = budget or EnumerationBudget()
    sets = tuple(frozenset(int(v) for v in ts) for ts in terminal_sets)
    if sets and sg.n > 64:
        return _profile_streaming(sg, sets, budget)
    indptr, indices, weights = sg.csr()
    count, best_w, best_nodes = kernels.johnson_profile(
        sg.n, indptr, indices, weights, _masks(sg, sets), budget.max_cycles
    )
    if count > budget.max_cycles:
        raise BudgetExceeded(budget.max_cycles)
    return CycleProfile(int(count), best_w, best_nodes, sets)


def _profile_streaming(sg, sets, budget) -> CycleProfile:
    rows = len(sets) + 1
    best_w = np.full((rows, sg.n + 1), -math.inf)
    best_nodes = np.full((rows, sg.n + 1, sg.n), -1, dtype=np.int32)
    count = 0
    for cyc in enumerate_cycles(sg, budget):
        count += 1
        nodes = cyc.nodes
        L = len(nodes)
        total = sum(sg.w(nodes[i], nodes[(i + 1) % L]) for i in range(L))
        on = set(nodes)
        for r in range(rows):
            if r and not sets[r - 1] <= on:
                continue
            cur = best_w[r, L]
            if total > cur or (total == cur and list(nodes) < best_nodes[r, L, :L].tolist()):
                best_w[r, L] = total
                best_nodes[r, L, :L] = nodes
    return CycleProfile(count, best_w, best_nodes, sets)


def exact_msic(graph: DiGraph, sg: DiGraph, p: ICDLParams,
               budget: EnumerationBudget | None = None) -> tuple[Cycle, float] | None:
    """F-maximal simple cycle; ties go to shorter, then lexicographically smaller cycles."""
    return cycle_profile(sg, (), budget).best(p)


def exact_kmsic(graph: DiGraph, sg: DiGraph, p: ICDLParams, terminals: Sequence[int],
                budget: EnumerationBudget | None = None) -> tuple[Cycle, float] | None:
    return cycle_profile(sg, [terminals], budget).best(p, row=1)


def gen_erdos(n: int, p: float, w_lo: int, w_hi: int, seed) -> DiGraph:
    """Directed G(n, p) without self-loops, integer weights uniform on ``[w_lo, w_hi]``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    if w_lo > w_hi:
        raise ValueError("w_lo must not exceed w_hi")
    rng = np.random.default_rng(seed)
    present = rng.random((n, n)) < p
    weights = rng.integers(w_lo, w_hi + 1, size=(n, n))
    np.fill_diagonal(present, False)
    src, dst = np.nonzero(present)
    return DiGraph(n, zip(src.tolist(), dst.tolist(), weights[src, dst].astype(float).tolist()))


def gadget_weight(n: int, poly_value: float) -> float:
    return n * poly_value + 1


def gen_r2vdp_gadget(base: DiGraph, marked: Sequence[int], poly_value: float) -> tuple[DiGraph, int]:
    """Two copies of ``base`` wired so that only a Hamiltonian Steiner cycle can use the heavy edge.

    ``marked`` are the base nodes playing roles 1, 2, 3, 4. Copy one keeps the
    base ids, copy two is shifted by ``n``. Adds 2(G1) -> 1(G2), 4(G2) -> 3(G1),
    4 -> 1 inside G1 and the heavy 2 -> 3 inside G2 with weight
    ``n * poly_value + 1``. The terminal is node 1 of G1.
    """
    n = base.n
    if len(marked) != 4 or len(set(marked)) != 4 or any(not 0 <= v < n for v in marked):
        raise ValueError("need four distinct marked nodes of the base graph")
    one, two, three, four = (int(v) for v in marked)
    weights: dict[tuple[int, int], float] = {}
    for u, v, _ in base.edges():
        weights[(u, v)] = 1.0
        weights[(u + n, v + n)] = 1.0
    weights[(two, one + n)] = 1.0
    weights[(four + n, three)] = 1.0
    weights[(four, one)] = 1.0
    weights[(two + n, three + n)] = gadget_weight(n, poly_value)
    return DiGraph(2 * n, ((u, v, w) for (u, v), w in weights.items())), one
