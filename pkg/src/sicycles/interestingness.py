"""Information content, description length and the interestingness ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .graph import Cycle, DiGraph, validate_cycle


class InvalidCycleError(ValueError):
    pass


@dataclass(frozen=True)
class ICDLParams:
    """Description-length parameters.

    ``alpha`` is the per-node cost of stating membership in the cycle and
    ``beta`` the per-node baseline cost; ``n`` is the order of the original
    input graph, never of a pruned subgraph.
    """

    q: float
    alpha: float
    beta: float
    n: int


def params_from_q(q: float, n: int, log=math.log2) -> ICDLParams:
    if not 0.0 < q < 0.5:
        raise ValueError(f"q must lie in (0, 1/2), got {q}")
    if n < 1:
        raise ValueError("n must be at least 1")
    return ICDLParams(q=q, alpha=log((1.0 - q) / q), beta=log(1.0 / (1.0 - q)), n=int(n))


def _nodes(cycle) -> tuple[int, ...]:
    return cycle.nodes if isinstance(cycle, Cycle) else tuple(cycle)


def ic(cycle, sg: DiGraph) -> float:
    """Sum of surprisal weights along the cycle."""
    nodes = _nodes(cycle)
    k = len(nodes)
    return math.fsum(sg.w(nodes[i], nodes[(i + 1) % k]) for i in range(k))


def dl(length: int, p: ICDLParams) -> float:
    return p.alpha * length + p.n * p.beta


def ratio(ic_value: float, length: int, p: ICDLParams) -> float:
    return ic_value / dl(length, p)


def interestingness(cycle, sg: DiGraph, p: ICDLParams) -> float:
    nodes = _nodes(cycle)
    if not nodes:
        return 0.0
    if not validate_cycle(sg, nodes):
        raise InvalidCycleError(f"{list(nodes)} is not a simple cycle of the graph")
    return ic(nodes, sg) / dl(len(nodes), p)


def best_ratio_by_length(best_weight: Iterable[float], p: ICDLParams) -> tuple[float, int]:
    """Max of ``W_L / DL(L)`` over lengths given best total weight per length.

    ``best_weight[L]`` is the heaviest cycle weight of length ``L`` (``-inf``
    when there is none); index 0 is ignored. Ties go to the shorter length.
    Returns ``(F, L)`` with ``L = 0`` when no cycle exists.
    """
    best_f, best_len = -math.inf, 0
    for length, weight in enumerate(best_weight):
        if length == 0 or weight == -math.inf:
            continue
        f = weight / dl(length, p)
        if f > best_f:
            best_f, best_len = f, length
    return (best_f if best_len else 0.0), best_len
