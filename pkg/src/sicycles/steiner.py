"""Local search for interesting Steiner cycles (cycles through given terminals).

A run prunes nodes that cannot lie on a short enough Steiner cycle, finds an
initial cycle with a distance-guided randomized DFS, stretches it with
extending changes up to ``l_max`` and then climbs with the best
sequential-primary, quad or shortcut change until none improves F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .graph import Cycle, DiGraph, bfs_hops
from .interestingness import ICDLParams, dl

PRIMARY = "sequential-primary"
QUAD = "quad"
SHORTCUT = "shortcut"
EXTEND = "extend"
ALL_KINDS = frozenset({PRIMARY, QUAD, SHORTCUT, EXTEND})
IMPROVING_KINDS = frozenset({PRIMARY, QUAD, SHORTCUT})
EPS = 1e-12


@dataclass(frozen=True)
class SteinerQuery:
    terminals: tuple[int, ...]
    l_max: int
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        terms = tuple(dict.fromkeys(int(t) for t in self.terminals))
        object.__setattr__(self, "terminals", terms)
        if not terms:
            raise ValueError("a Steiner query needs at least one terminal")
        if self.l_max < max(len(terms), 1):
            raise ValueError("l_max must be at least the number of terminals")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")

    @property
    def k(self) -> int:
        return len(self.terminals)


@dataclass(frozen=True)
class Pruned:
    """Induced subgraph on the surviving nodes; ``nodes[i]`` is the original id of ``i``."""

    graph: DiGraph
    nodes: np.ndarray

    @property
    def empty(self) -> bool:
        return len(self.nodes) == 0

    def local(self, ids: Iterable[int]) -> list[int]:
        index = {int(v): i for i, v in enumerate(self.nodes)}
        return [index[int(v)] for v in ids]

    def original(self, ids: Iterable[int]) -> list[int]:
        return [int(self.nodes[i]) for i in ids]


def prune(graph: DiGraph, query: SteinerQuery) -> Pruned:
    """Keep nodes ``v`` with ``hops(q, v) + hops(v, q) <= l_max`` for every terminal ``q``."""
    for q in query.terminals:
        if not 0 <= q < graph.n:
            raise ValueError(f"terminal {q} outside [0, {graph.n})")
    keep = np.ones(graph.n, dtype=bool)
    for q in query.terminals:
        fwd = np.asarray(bfs_hops(graph, q))
        back = np.asarray(bfs_hops(graph, q, reversed=True))
        keep &= fwd + back <= query.l_max
    if not all(keep[q] for q in query.terminals):
        return Pruned(DiGraph(0, []), np.zeros(0, dtype=np.int64))
    sub, nodes = graph.subgraph(np.flatnonzero(keep).tolist())
    return Pruned(sub, nodes)


def initial_cycle(pruned: DiGraph, query: SteinerQuery, rng, budget: int | None = None) -> Cycle | None:
    """Randomized DFS for a Steiner cycle of length at most ``l_max``.

    Children are drawn from the current frontier with probability
    proportional to ``1 / sum_q hops(v, q)``. ``query.terminals`` must be ids
    of ``pruned``. Gives up after ``budget`` node expansions (default
    ``50 * n``).
    """
    g = pruned
    if g.n == 0:
        return None
    terms = list(query.terminals)
    tset = set(terms)
    budget = 50 * g.n if budget is None else budget
    to_term = {q: bfs_hops(g, q, reversed=True) for q in terms}
    dist_sum = [sum(to_term[q][v] for q in terms) for v in range(g.n)]
    start = terms[int(rng.integers(len(terms)))]
    back_to_start = to_term[start]

    def lower_bound(v: int, missing: set[int]) -> float:
        # edges still needed from v: visit every missing terminal, then return
        lb = back_to_start[v]
        for t in missing:
            if t != v:
                lb = max(lb, to_term[t][v] + back_to_start[t])
        return lb

    def candidates(u: int, on_path: set[int], missing: set[int], depth_edges: int) -> list[int]:
        out = []
        for v in g.successors(u):
            if v in on_path:
                continue
            if depth_edges + 1 + lower_bound(v, missing - {v}) <= query.l_max:
                out.append(v)
        return out

    def draw(frontier: list[int]) -> int:
        finite = [dist_sum[v] for v in frontier if dist_sum[v] > 0]
        top = max((1.0 / d for d in finite), default=1.0)
        w = np.array([1.0 / dist_sum[v] if dist_sum[v] > 0 else top for v in frontier])
        return int(rng.choice(len(frontier), p=w / w.sum()))

    path = [start]
    on_path = {start}
    missing = tset - {start}
    if not missing and g.has_edge(start, start):
        return Cycle([start])
    frontiers = [candidates(start, on_path, missing, 0)]
    expansions = 0
    while frontiers:
        frontier = frontiers[-1]
        if not frontier:
            frontiers.pop()
            v = path.pop()
            on_path.discard(v)
            if v in tset:
                missing.add(v)
            continue
        if expansions >= budget:
            return None
        v = frontier.pop(draw(frontier))
        expansions += 1
        path.append(v)
        on_path.add(v)
        missing.discard(v)
        if not missing and g.has_edge(v, start) and len(path) <= query.l_max:
            return Cycle(path)
        frontiers.append(candidates(v, on_path, missing, len(path) - 1))
    return None


# ---------------------------------------------------------------- changes


@dataclass(frozen=True)
class Change:
    kind: str
    positions: tuple[int, ...]  # removed cycle-edge positions, sorted
    removed: tuple[tuple[int, int], ...]
    added: tuple[tuple[int, int], ...]
    delta_f: float
    result: Cycle
    delta_ic: float = 0.0

    def key(self):
        """Selection order: larger delta F, then smaller removed-position tuple."""
        return (-self.delta_f, self.positions)


def _segment(c: Sequence[int], start: int, end: int) -> list[int]:
    # positions start..end inclusive, cyclically
    L = len(c)
    out = [c[start % L]]
    i = start % L
    while i != end % L:
        i = (i + 1) % L
        out.append(c[i])
    return out


def _reorder_result(c, idx, quad):
    L = len(c)
    if quad:
        i, j, k, l = idx
        A = _segment(c, l + 1, i)
        B = _segment(c, i + 1, j)
        C = _segment(c, j + 1, k)
        D = _segment(c, k + 1, l)
        return A + D + C + B
    i, j, k = idx
    S1 = _segment(c, i + 1, j)
    S2 = _segment(c, j + 1, k)
    S3 = _segment(c, k + 1, i)
    return S1 + S3 + S2


def _reorder_added(c, idx, quad):
    L = len(c)
    nx = [(t + 1) % L for t in idx]
    if quad:
        i, j, k, l = idx
        i1, j1, k1, l1 = nx
        return ((c[i], c[k1]), (c[l], c[j1]), (c[k], c[i1]), (c[j], c[l1]))
    i, j, k = idx
    i1, j1, k1 = nx
    return ((c[i], c[j1]), (c[j], c[k1]), (c[k], c[i1]))


class _Ctx:
    """Cycle plus cached weights for fast change evaluation."""

    def __init__(self, nodes, sg: DiGraph, p: ICDLParams, query: SteinerQuery, wmat=None):
        self.c = list(nodes)
        self.sg = sg
        self.p = p
        self.query = query
        self.terms = set(query.terminals)
        self.wmat = sg.weight_matrix(missing=-math.inf) if wmat is None else wmat
        L = len(self.c)
        self.edge_w = [self.wmat[self.c[i], self.c[(i + 1) % L]] for i in range(L)]
        self.ic = math.fsum(self.edge_w)
        self.f = self.ic / dl(L, p)

    def _change(self, kind, positions, added, result, new_ic, new_len):
        c, L = self.c, len(self.c)
        removed = tuple((c[t], c[(t + 1) % L]) for t in positions)
        delta_f = new_ic / dl(new_len, self.p) - self.f
        return Change(kind, tuple(sorted(positions)), removed, tuple(added), delta_f,
                      Cycle(result), new_ic - self.ic)

    def reorders(self, quad: bool) -> list[Change]:
        c, L, W = self.c, len(self.c), self.wmat
        out = []
        for idx in combinations(range(L), 4 if quad else 3):
            added = _reorder_added(c, idx, quad)
            gain = [W[a, b] for a, b in added]
            if not all(math.isfinite(x) for x in gain):
                continue
            new_ic = self.ic - math.fsum(self.edge_w[t] for t in idx) + math.fsum(gain)
            out.append(self._change(QUAD if quad else PRIMARY, idx, added,
                                    _reorder_result(c, idx, quad), new_ic, L))
        return out

    def shortcuts(self) -> list[Change]:
        c, L, W = self.c, len(self.c), self.wmat
        out = []
        for i in range(L):
            for s in range(1, L):
                skipped = [c[(i + t) % L] for t in range(1, s + 1)]
                if any(v in self.terms for v in skipped):
                    break
                a, b = c[i], c[(i + s + 1) % L]
                w_ab = W[a, b]
                if not math.isfinite(w_ab):
                    continue
                positions = [(i + t) % L for t in range(s + 1)]
                new_ic = self.ic - math.fsum(self.edge_w[t] for t in positions) + w_ab
                result = [c[(i + s + 1 + t) % L] for t in range(L - s)]
                out.append(self._change(SHORTCUT, positions, [(a, b)], result, new_ic, L - s))
        return out

    def extends(self) -> list[Change]:
        c, L, W = self.c, len(self.c), self.wmat
        if L + 1 > self.query.l_max:
            return []
        on = set(c)
        out = []
        for i in range(L):
            a, b = c[i], c[(i + 1) % L]
            for v in self.sg.successors(a):
                if v in on or not math.isfinite(W[v, b]):
                    continue
                new_ic = self.ic - self.edge_w[i] + W[a, v] + W[v, b]
                result = c[: i + 1] + [v] + c[i + 1 :]
                out.append(self._change(EXTEND, [i], [(a, v), (v, b)], result, new_ic, L + 1))
        return out

    def best_reorder(self, quad: bool) -> Change | None:
        L = len(self.c)
        if L < (4 if quad else 3):
            return None
        M = self.wmat[np.ix_(self.c, self.c)]
        delta, i, j, k, l = kernels.best_reorder(M, quad)
        if delta == -math.inf:
            return None
        idx = (i, j, k, l) if quad else (i, j, k)
        added = _reorder_added(self.c, idx, quad)
        new_ic = self.ic - math.fsum(self.edge_w[t] for t in idx) + math.fsum(self.wmat[a, b] for a, b in added)
        return self._change(QUAD if quad else PRIMARY, idx, added,
                            _reorder_result(self.c, idx, quad), new_ic, L)


def _pick(changes: Iterable[Change | None]) -> Change | None:
    best = None
    for ch in changes:
        if ch is not None and (best is None or ch.key() < best.key()):
            best = ch
    return best


def enumerate_changes(cycle, sg: DiGraph, p: ICDLParams, query: SteinerQuery,
                      kinds: Iterable[str] = ALL_KINDS) -> list[Change]:
    """Every legal change of the requested kinds for ``cycle``.

    Shortcuts never bypass a terminal; extensions respect ``query.l_max``.
    """
    kinds = set(kinds)
    ctx = _Ctx(cycle, sg, p, query)
    out: list[Change] = []
    if PRIMARY in kinds:
        out += ctx.reorders(quad=False)
    if QUAD in kinds:
        out += ctx.reorders(quad=True)
    if SHORTCUT in kinds:
        out += ctx.shortcuts()
    if EXTEND in kinds:
        out += ctx.extends()
    return out


def best_change(cycle, sg: DiGraph, p: ICDLParams, query: SteinerQuery,
                kinds: Iterable[str] = IMPROVING_KINDS, wmat=None) -> Change | None:
    """Best change by delta F (ties: smallest removed-position tuple)."""
    kinds = set(kinds)
    ctx = _Ctx(cycle, sg, p, query, wmat)
    cands: list[Change | None] = []
    if PRIMARY in kinds:
        cands.append(ctx.best_reorder(quad=False))
    if QUAD in kinds:
        cands.append(ctx.best_reorder(quad=True))
    if SHORTCUT in kinds:
        cands.append(_pick(ctx.shortcuts()))
    if EXTEND in kinds:
        cands.append(_pick(ctx.extends()))
    return _pick(cands)


# ---------------------------------------------------------------- driver


@dataclass
class TraceStep:
    restart: int
    kind: str
    delta_f: float
    f: float
    length: int


@dataclass
class SearchResult:
    cycle: Cycle  # original node ids
    f: float
    restart: int
    initial_f: float  # best initial cycle over all restarts
    found: int  # restarts that produced an initial cycle
    trace: list[TraceStep] = field(default_factory=list)


def _climb(nodes, sg, p, query, wmat, restart, trace):
    ic = math.fsum(wmat[nodes[i], nodes[(i + 1) % len(nodes)]] for i in range(len(nodes)))
    f = ic / dl(len(nodes), p)
    while True:
        ch = best_change(nodes, sg, p, query, IMPROVING_KINDS, wmat)
        if ch is None or ch.delta_f <= EPS:
            return nodes, f
        nodes = list(ch.result.nodes)
        ic += ch.delta_ic
        f = ic / dl(len(nodes), p)
        trace.append(TraceStep(restart, ch.kind, ch.delta_f, f, len(nodes)))


def _run(init: Cycle, sg, p, query, restart, trace):
    wmat = sg.weight_matrix(missing=-math.inf)
    nodes = list(init.nodes)
    ic = math.fsum(wmat[nodes[i], nodes[(i + 1) % len(nodes)]] for i in range(len(nodes)))
    f = ic / dl(len(nodes), p)
    best_nodes, best_f = nodes, f
    while len(nodes) < query.l_max:
        ch = best_change(nodes, sg, p, query, {EXTEND}, wmat)
        if ch is None:
            break
        nodes = list(ch.result.nodes)
        ic += ch.delta_ic
        f = ic / dl(len(nodes), p)
        trace.append(TraceStep(restart, EXTEND, ch.delta_f, f, len(nodes)))
        if f > best_f:
            best_nodes, best_f = nodes, f
    final, final_f = _climb(nodes, sg, p, query, wmat, restart, trace)
    if best_nodes is not nodes:
        # an earlier, better cycle of the stretch phase gets its own climb
        other, other_f = _climb(best_nodes, sg, p, query, wmat, restart, trace)
        if other_f > final_f:
            final, final_f = other, other_f
    return final, final_f


def local_search(graph: DiGraph, sg: DiGraph, query: SteinerQuery, p: ICDLParams) -> SearchResult | None:
    """Best Steiner cycle over ``query.restarts`` seeded runs, or ``None`` if none was found.

    ``None`` does not prove that no Steiner cycle of length ``<= l_max`` exists.
    """
    pruned = prune(graph, query)
    if pruned.empty:
        return None
    local_sg, _ = sg.subgraph(pruned.nodes.tolist())
    local_query = SteinerQuery(tuple(pruned.local(query.terminals)), query.l_max, query.restarts, query.seed)
    seeds = np.random.SeedSequence(query.seed).spawn(query.restarts)
    best: SearchResult | None = None
    initial_f = -math.inf
    found = 0
    trace: list[TraceStep] = []
    for r, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        init = initial_cycle(pruned.graph, local_query, rng)
        if init is None:
            continue
        found += 1
        init_ic = math.fsum(local_sg.w(a, b) for a, b in init.edges())
        initial_f = max(initial_f, init_ic / dl(len(init), p))
        nodes, f = _run(init, local_sg, p, local_query, r, trace)
        if best is None or f > best.f:
            best = SearchResult(Cycle(pruned.original(nodes)), f, r, initial_f, found)
    if best is None:
        return None
    best.initial_f = initial_f
    best.found = found
    best.trace = trace
    return best
