import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_cycles, cycle_weight, random_graph
from sicycles.graph import Cycle, DiGraph
from sicycles.interestingness import dl, params_from_q
from sicycles.oracle import (
    BudgetExceeded,
    EnumerationBudget,
    cycle_profile,
    enumerate_cycles,
    exact_kmsic,
    exact_msic,
    gadget_weight,
    gen_erdos,
    gen_r2vdp_gadget,
)


def complete(n):
    return DiGraph(n, [(u, v, 1.0) for u in range(n) for v in range(n) if u != v])


def test_k4_has_twenty_cycles():
    assert sum(1 for _ in enumerate_cycles(complete(4))) == 20


def test_budget():
    with pytest.raises(BudgetExceeded):
        list(enumerate_cycles(complete(5), EnumerationBudget(10)))
    with pytest.raises(BudgetExceeded):
        cycle_profile(complete(5), budget=EnumerationBudget(10))
    with pytest.raises(ValueError):
        EnumerationBudget(0)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 7), st.floats(0.1, 0.8), st.booleans(), st.integers(0, 2**32 - 1))
def test_johnson_matches_permutation_oracle(n, p, loops, seed):
    g = random_graph(np.random.default_rng(seed), n, p, self_loops=loops)
    got = [c.nodes for c in enumerate_cycles(g)]
    assert len(got) == len(set(got))
    assert all(c == Cycle(c).canonical().nodes for c in got)
    assert set(got) == brute_cycles(g)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.floats(0.2, 0.8), st.floats(0.01, 0.49), st.integers(0, 2**32 - 1))
def test_exact_solvers_match_brute_force(n, p, q, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p)
    par = params_from_q(q, n)
    cycles = brute_cycles(g)
    res = exact_msic(g, g, par)
    if not cycles:
        assert res is None
        return
    best = max(cycle_weight(g, c) / dl(len(c), par) for c in cycles)
    assert res[1] == pytest.approx(best, rel=1e-12)
    assert cycle_weight(g, res[0].nodes) / dl(len(res[0]), par) == pytest.approx(best, rel=1e-12)

    terms = rng.choice(n, size=int(rng.integers(1, min(3, n) + 1)), replace=False).tolist()
    steiner = [c for c in cycles if set(terms) <= set(c)]
    res = exact_kmsic(g, g, par, terms)
    if not steiner:
        assert res is None
    else:
        best = max(cycle_weight(g, c) / dl(len(c), par) for c in steiner)
        assert set(terms) <= set(res[0].nodes)
        assert res[1] == pytest.approx(best, rel=1e-12)


def test_profile_max_mean_and_streaming_path():
    g = gen_erdos(9, 0.4, 1, 50, 3)
    prof = cycle_profile(g, [[0], [1, 2]])
    means = [cycle_weight(g, c.nodes) / len(c) for c in enumerate_cycles(g)]
    assert prof.max_mean() == pytest.approx(max(means))
    from sicycles.oracle import _profile_streaming

    slow = _profile_streaming(g, prof.terminal_sets, EnumerationBudget())
    np.testing.assert_array_equal(slow.best_weight, prof.best_weight)
    np.testing.assert_array_equal(slow.best_nodes, prof.best_nodes)
    assert slow.count == prof.count


def test_gen_erdos_deterministic_and_density():
    a, b = gen_erdos(15, 0.3, 1, 9, 42), gen_erdos(15, 0.3, 1, 9, 42)
    assert a.edge_set() == b.edge_set()
    assert all(u != v and 1 <= w <= 9 and w == int(w) for u, v, w in a.edges())
    n, p, trials = 20, 0.2, 200
    ms = [gen_erdos(n, p, 1, 10_000, s).m for s in range(trials)]
    cells = n * (n - 1)
    sigma = math.sqrt(cells * p * (1 - p) / trials)
    assert abs(np.mean(ms) - cells * p) <= 3 * sigma


def test_gadget_shape():
    base = DiGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    g, term = gen_r2vdp_gadget(base, [0, 1, 2, 3], 2.0)
    assert (g.n, term) == (8, 0)
    W = gadget_weight(4, 2.0)
    assert W == 9.0
    assert g.w(5, 6) == W
    assert {(1, 4), (7, 2), (3, 0)} <= {(u, v) for u, v, _ in g.edges()}
    with pytest.raises(ValueError):
        gen_r2vdp_gadget(base, [0, 1, 2, 2], 2.0)
