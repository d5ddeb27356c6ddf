import itertools
import math

import numpy as np
import pytest

from sicycles.graph import Cycle, DiGraph

BLOCKY = np.array([
    [0, 99, 1, 0],
    [97, 0, 1, 2],
    [1, 1, 0, 98],
    [2, 0, 98, 0],
], dtype=float)


def brute_cycles(graph: DiGraph) -> set[tuple[int, ...]]:
    """All simple cycles by trying every ordered node subset (small n only)."""
    out = set()
    for v in range(graph.n):
        if graph.has_edge(v, v):
            out.add((v,))
    for size in range(2, graph.n + 1):
        for subset in itertools.combinations(range(graph.n), size):
            first, rest = subset[0], subset[1:]
            for perm in itertools.permutations(rest):
                nodes = (first,) + perm
                if all(graph.has_edge(nodes[i], nodes[(i + 1) % size]) for i in range(size)):
                    out.add(nodes)
    return out


def random_graph(rng, n, p, self_loops=False, w_hi=100):
    edges = []
    for u in range(n):
        for v in range(n):
            if (u != v or self_loops) and rng.random() < p:
                edges.append((u, v, float(rng.integers(1, w_hi + 1))))
    return DiGraph(n, edges)


def cycle_weight(graph, nodes):
    return math.fsum(graph.w(a, b) for a, b in Cycle(nodes).edges())


@pytest.fixture
def blocky_graph():
    return DiGraph.from_matrix(BLOCKY, keep_zero=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_changes(graph: DiGraph, cycle, terminals, l_max, all_cycles=None):
    """Legal changes of ``cycle`` found by comparing it with every other simple cycle.

    Returns a set of ``(kind, canonical nodes)``; the kinds are told apart by
    node sets and the edges gained or lost, never by the move geometry.
    """
    cycles = brute_cycles(graph) if all_cycles is None else all_cycles
    c = tuple(cycle)
    nodes = set(c)
    edges = set(Cycle(c).edges())
    terms_on = set(terminals) & nodes
    out = set()
    for other in cycles:
        o_nodes = set(other)
        o_edges = set(Cycle(other).edges())
        lost = len(edges - o_edges)
        new = len(o_edges - edges)
        if o_nodes == nodes:
            if lost == new == 3:
                out.add(("sequential-primary", other))
            elif lost == new == 4:
                out.add(("quad", other))
        elif o_nodes < nodes and new == 1 and terms_on <= o_nodes:
            out.add(("shortcut", other))
        elif nodes < o_nodes and len(o_nodes) == len(nodes) + 1 <= l_max and lost == 1:
            out.add(("extend", other))
    return out
