"""Karp's maximum-mean-cycle solver and its description-length-aware variant.

Both run on the sign-reversed surprisal graph (a maximum mean on ``w`` is a
minimum mean on ``-w``) augmented with a virtual super-source that has
zero-weight edges to every node. The augmented graph has ``N = n + 1``
nodes, so the table has levels ``0..N``; level ``k >= 1`` holds walks of
``k - 1`` real edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import Cycle, DiGraph
from .interestingness import ICDLParams

INF = math.inf
TOL = 1e-9


@dataclass(frozen=True)
class KarpTable:
    D: np.ndarray  # (N + 1, n) minimum progression weights on -w
    pred: np.ndarray  # predecessor of v at level k (-1: super-source / none)
    n: int

    @property
    def levels(self) -> int:
        """``N``, the top level (order of the augmented graph)."""
        return self.n + 1


def build_karp_table(sg: DiGraph) -> KarpTable:
    D, pred = kernels.karp_table(sg.n, sg.src, sg.dst, -sg.weight)
    return KarpTable(D=D, pred=pred, n=sg.n)


def _minmax(table: KarpTable, denom) -> tuple[int, float]:
    """``argmin_v max_k (D_N(v) - D_k(v)) / denom(N - k)`` with Karp's tie rules.

    Smallest ``v`` wins ties on the outer min, smallest ``k`` on the inner
    max. Returns ``(-1, inf)`` when every ``D_N(v)`` is infinite.
    """
    D, N = table.D, table.levels
    if table.n == 0:
        return -1, INF
    lengths = np.array([denom(N - k) for k in range(1, N)], dtype=float)
    top = D[N]
    with np.errstate(invalid="ignore"):
        vals = (top[None, :] - D[1:N]) / lengths[:, None]
    vals[~np.isfinite(D[1:N])] = -INF
    worst = vals.max(axis=0)
    worst[~np.isfinite(top)] = INF
    v = int(np.argmin(worst))
    if worst[v] == INF:
        return -1, INF
    return v, float(worst[v])


def _walk(table: KarpTable, level: int, v: int) -> list[int]:
    """Forward node sequence of the optimal progression ending at ``(level, v)``."""
    seq = []
    k, u = level, v
    while k >= 1 and u >= 0:
        seq.append(u)
        u = int(table.pred[k, u])
        k -= 1
    seq.reverse()
    return seq


def _first_cycle(seq: list[int]) -> list[int] | None:
    # walking back from the end, the first repeated node closes a cycle
    pos: dict[int, int] = {}
    for idx in range(len(seq) - 1, -1, -1):
        u = seq[idx]
        if u in pos:
            return seq[idx : pos[u]]
        pos[u] = idx
    return None


def _all_cycles(seq: list[int]) -> list[list[int]]:
    """Decompose a walk into simple cycles (stack method)."""
    out, stack, where = [], [], {}
    for u in seq:
        if u in where:
            start = where[u]
            out.append(stack[start:])
            for x in stack[start:]:
                del where[x]
            del stack[start:]
        where[u] = len(stack)
        stack.append(u)
    return out


def extract_cycle(table: KarpTable, v: int) -> Cycle:
    if table.D[table.levels, v] == INF:
        raise ValueError(f"no progression of full length ends at node {v}")
    cyc = _first_cycle(_walk(table, table.levels, v))
    assert cyc is not None  # N nodes on n < N distinct ids must repeat
    return Cycle(cyc)


def _mean(cycle, sg: DiGraph) -> float:
    nodes = list(cycle)
    k = len(nodes)
    return math.fsum(sg.w(nodes[i], nodes[(i + 1) % k]) for i in range(k)) / k


def karp_mmc(sg: DiGraph, table: KarpTable | None = None) -> tuple[float, Cycle] | None:
    """Maximum mean cycle of ``sg``, or ``None`` for an acyclic graph."""
    table = table or build_karp_table(sg)
    v, rho = _minmax(table, lambda length: length)
    if v < 0:
        return None
    mean = -rho
    cycle = extract_cycle(table, v)
    if abs(_mean(cycle, sg) - mean) <= TOL * max(1.0, abs(mean)):
        return _mean(cycle, sg), cycle
    # rare tie cases: search every cycle on every full-length progression
    best = None
    for u in range(table.n):
        if table.D[table.levels, u] == INF:
            continue
        for cyc in _all_cycles(_walk(table, table.levels, u)):
            mu = _mean(cyc, sg)
            if best is None or mu > best[0] + TOL:
                best = (mu, Cycle(cyc))
    if best is None or abs(best[0] - mean) > TOL * max(1.0, abs(mean)):
        raise RuntimeError("Karp extraction failed to recover a cycle of the optimal mean")
    return best


def karp_variant_select(table: KarpTable, p: ICDLParams) -> tuple[int, float]:
    """Node and value minimising the length-penalised Karp ratio on ``-w``."""
    return _minmax(table, lambda length: p.alpha * length + p.n * p.beta)


def karp_variant(sg: DiGraph, p: ICDLParams, table: KarpTable | None = None) -> Cycle | None:
    """Cycle from the progression of the node picked by the penalised ratio.

    The selection value assumes a cycle of length ``N - k`` while the
    extracted cycle may be shorter; callers score the result by its true F.
    """
    table = table or build_karp_table(sg)
    v, _ = karp_variant_select(table, p)
    if v < 0:
        return None
    return extract_cycle(table, v)
