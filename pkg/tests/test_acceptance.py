"""Acceptance checks, one PASS/FAIL line per criterion.

Run directly (``python tests/test_acceptance.py``) for the summary, or via
pytest where each criterion is its own test.
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import BLOCKY, brute_changes, brute_cycles, random_graph  # noqa: E402
from sicycles.background import Block, MaxEntDual, PriorSpec, edge_survival, fit_maxent, surprisal_graph  # noqa: E402
from sicycles.graph import DiGraph, validate_cycle  # noqa: E402
from sicycles.interestingness import interestingness, params_from_q  # noqa: E402
from sicycles.mmc import karp_mmc  # noqa: E402
from sicycles.oracle import (  # noqa: E402
    EnumerationBudget,
    cycle_profile,
    enumerate_cycles,
    exact_kmsic,
    exact_msic,
    gen_erdos,
    gen_r2vdp_gadget,
)
from sicycles.steiner import IMPROVING_KINDS, SteinerQuery, enumerate_changes, local_search  # noqa: E402

BIG_BUDGET = EnumerationBudget(10**9)


def report(num: int, name: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'} [{num}] {name}: {detail}", flush=True)
    return ok


# ---------------------------------------------------------------- 1


def criterion_1() -> bool:
    t0 = time.perf_counter()
    g = DiGraph.from_matrix(BLOCKY, keep_zero=True)
    diag = Block(tuple((i, i) for i in range(4)), 0.0)
    setups = {
        "a": (PriorSpec(), np.full((4, 4), 25.0), 0.038),
        "b": (PriorSpec(blocks=(diag,)), np.where(np.eye(4) > 0, 0.0, 100 / 3), 0.054),
        "c": (
            PriorSpec(blocks=(diag, Block.product([0, 1], [0, 1], 196.0))),
            np.array([[0, 98, 1, 1], [98, 0, 1, 1], [1, 1, 0, 98], [1, 1, 98, 0]], dtype=float),
            0.53,
        ),
    }
    ok, parts = True, []
    for key, (prior, want, surv_want) in setups.items():
        model = fit_maxent(g, prior)
        err = float(np.max(np.abs(model.expected() - want)))
        surv = edge_survival(model, 0, 1, 99)
        good_e, good_s = err <= 1.0, abs(surv - surv_want) <= 0.01
        ok &= good_e and good_s
        parts.append(f"({key}) max|E-printed|={err:.2g}{'' if good_e else '!'} "
                     f"Pr={surv:.4f} vs {surv_want}{'' if good_s else '!'}")
    dt = time.perf_counter() - t0
    ok &= dt < 1.0
    return report(1, "maxent block-prior reproduction", ok, "; ".join(parts) + f"; {dt:.2f}s")


# ---------------------------------------------------------------- 2


def criterion_2() -> bool:
    t0 = time.perf_counter()
    worst, bad = 0.0, 0
    for seed in range(200):
        n = 4 + seed % 9
        g = gen_erdos(n, 0.3, 1, 100, seed)
        means = [math.fsum(g.w(a, b) for a, b in c.edges()) / len(c) for c in enumerate_cycles(g)]
        res = karp_mmc(g)
        if not means:
            bad += res is not None
            continue
        if res is None:
            bad += 1
            continue
        worst = max(worst, abs(res[0] - max(means)))
    dt = time.perf_counter() - t0
    ok = bad == 0 and worst <= 1e-9 and dt < 30
    return report(2, "karp vs enumeration max mean", ok, f"max|delta|={worst:.2g}, mismatches={bad}, {dt:.1f}s")


# ---------------------------------------------------------------- 3


def criterion_3() -> bool:
    t0 = time.perf_counter()
    n, qs = 20, (0.1, 0.2, 0.3)
    params = {q: params_from_q(q, n) for q in qs}
    violations, worst_slack = 0, -math.inf
    good_ratio, instances, total_cycles = 0, 0, 0
    for seed in range(200):
        g = gen_erdos(n, 0.2, 1, 10_000, seed)
        prof = cycle_profile(g, (), BIG_BUDGET)
        total_cycles += prof.count
        karp = karp_mmc(g)
        if karp is None:
            continue
        instances += 1
        for q, p in params.items():
            _, f_exact = prof.best(p)
            f_karp = interestingness(karp[1], g, p)
            bound = (p.alpha + n * p.beta / 2) / (p.alpha + p.beta)
            slack = f_exact / f_karp - bound
            worst_slack = max(worst_slack, slack)
            violations += slack > 1e-9
            if q == 0.1 and f_karp / f_exact >= 0.70:
                good_ratio += 1
    share = good_ratio / instances
    ok = violations == 0 and share >= 0.90
    dt = time.perf_counter() - t0
    return report(3, "karp approximation bound", ok,
                  f"{instances} cyclic instances, {total_cycles} cycles, bound violations={violations} "
                  f"(max ratio-bound={worst_slack:.3f}), q=0.1 share with ratio>=0.70: {share:.1%}, {dt:.0f}s")


# ---------------------------------------------------------------- 4


def criterion_4() -> bool:
    ok, parts = True, []
    rho = 1.7
    for n in (3, 10, 50):
        g = DiGraph(n, [(i, (i + 1) % n, rho) for i in range(n)])
        p = params_from_q(0.1, n)
        want = rho * n / (p.alpha * n + n * p.beta)
        got = {
            "exact": exact_msic(g, g, p)[1],
            "karp": interestingness(karp_mmc(g)[1], g, p),
            "local": local_search(g, g, SteinerQuery((n - 1,), n), p).f,
        }
        dev = max(abs(v - want) / want for v in got.values())
        ok &= dev <= 1e-12
        parts.append(f"n={n} max rel dev {dev:.1g}")
    return report(4, "uniform-weight hamiltonian rings", ok, ", ".join(parts))


# ---------------------------------------------------------------- 5


def criterion_5() -> bool:
    t0 = time.perf_counter()
    n, q, l_max, restarts = 20, 0.05, 20, 5
    p = params_from_q(q, n)
    fails = {"i": 0, "ii": 0, "iii": 0, "iv": 0}
    runs = found = missed = 0
    for seed in range(100):
        g = gen_erdos(n, 0.2, 1, 10_000, seed)
        rng = np.random.default_rng([seed, 1])
        term_sets = [tuple(int(t) for t in rng.choice(n, k, replace=False)) for k in (1, 5, 10)]
        prof = cycle_profile(g, term_sets, BIG_BUDGET)
        for row, terms in enumerate(term_sets, start=1):
            runs += 1
            res = local_search(g, g, SteinerQuery(terms, l_max, restarts, seed), p)
            if res is None:
                missed += prof.best(p, row) is not None
                continue
            found += 1
            cyc = res.cycle
            if not (validate_cycle(g, cyc) and set(terms) <= set(cyc.nodes) and len(cyc) <= l_max):
                fails["i"] += 1
            f = interestingness(cyc, g, p)
            changes = enumerate_changes(cyc, g, p, SteinerQuery(terms, l_max), IMPROVING_KINDS)
            if any(ch.delta_f > 1e-9 * max(1.0, f) for ch in changes):
                fails["ii"] += 1
            exact = prof.best(p, row)
            if exact is None or f > exact[1] * (1 + 1e-12):
                fails["iii"] += 1
            if f < res.initial_f * (1 - 1e-12):
                fails["iv"] += 1
    ok = not any(fails.values())
    dt = time.perf_counter() - t0
    detail = ", ".join(f"({k}) {v} failures" for k, v in fails.items())
    return report(5, "local search properties", ok,
                  f"{found}/{runs} runs found a cycle ({missed} missed an existing one); {detail}; {dt:.0f}s")


# ---------------------------------------------------------------- 6


def criterion_6() -> bool:
    rng = np.random.default_rng(2024)
    mismatches = cycles_checked = changes_seen = 0
    for _ in range(30):
        n = int(rng.integers(3, 9))
        g = random_graph(rng, n, 0.35 if n > 6 else 0.5, self_loops=bool(rng.integers(2)))
        terms = tuple(int(t) for t in rng.choice(n, int(rng.integers(1, 3)), replace=False))
        query = SteinerQuery(terms, int(rng.integers(len(terms), n + 1)))
        p = params_from_q(0.1, n)
        cycles = brute_cycles(g)
        for c in cycles:
            got = {(ch.kind, ch.result.canonical().nodes) for ch in enumerate_changes(c, g, p, query)}
            want = brute_changes(g, c, terms, query.l_max, cycles)
            cycles_checked += 1
            changes_seen += len(want)
            mismatches += got != want
    ok = mismatches == 0 and cycles_checked > 0
    return report(6, "change neighbourhood exhaustiveness", ok,
                  f"{cycles_checked} cycles, {changes_seen} legal changes, {mismatches} mismatches")


# ---------------------------------------------------------------- 7


def criterion_7() -> bool:
    poly = 3.0
    yes_base = DiGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    g, term = gen_r2vdp_gadget(yes_base, [0, 1, 2, 3], poly)
    p = params_from_q(0.1, g.n)
    W = 4 * poly + 1
    cyc, f = exact_kmsic(g, g, p, [term])
    hand = (2 * 4 - 1 + W) / (p.alpha * 8 + 8 * p.beta)
    heavy = (5, 6) in cyc.edges()
    yes_ok = heavy and len(cyc) == 8 and abs(f - hand) <= 1e-12 * hand

    # node 3 (role 3) has no out-edges, so no path from role 3 to role 4 exists
    no_base = DiGraph(4, [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (3, 0, 1.0)])
    h, term = gen_r2vdp_gadget(no_base, [0, 1, 2, 3], poly)
    steiner = [c for c in enumerate_cycles(h) if term in c.nodes]
    no_ok = bool(steiner) and all((5, 6) not in c.edges() for c in steiner)
    return report(7, "hardness gadget", yes_ok and no_ok,
                  f"YES: heavy edge used={heavy}, length={len(cyc)}, F={f:.6f} vs hand {hand:.6f}; "
                  f"NO: {len(steiner)} Steiner cycles, none through the heavy edge={no_ok}")


# ---------------------------------------------------------------- 8


def criterion_8() -> bool:
    rng = np.random.default_rng(8)
    worst, checked = 0.0, 0
    for inst in range(20):
        g = gen_erdos(6, 0.6, 1, 30, 100 + inst)
        cells = {(int(i), int(j)) for i, j in rng.integers(0, 6, size=(int(rng.integers(2, 10)), 2))}
        target = sum(g.w(i, j) for i, j in cells if g.has_edge(i, j)) or 1.0
        dual = MaxEntDual(6, g.out_strength(), g.in_strength(), [Block(tuple(cells), target)])
        theta = dual.initial() + rng.uniform(0.0, 0.3, dual.size)
        grad = dual.grad(theta)
        h = 1e-5
        for i in range(dual.size):
            e = np.zeros(dual.size)
            e[i] = h
            fd = (dual.value(theta + e) - dual.value(theta - e)) / (2 * h)
            worst = max(worst, abs(fd - grad[i]) / max(abs(grad[i]), 1e-8))
            checked += 1
    return report(8, "dual gradient vs finite differences", worst <= 1e-4,
                  f"{checked} partials, max relative error {worst:.2g}")


# ---------------------------------------------------------------- 9


def criterion_9() -> bool:
    rng = np.random.default_rng(9)
    worst, count = 0.0, 0
    seed = 0
    while count < 50:
        g = gen_erdos(8, 0.4, 1, 50, seed)
        seed += 1
        cycles = list(enumerate_cycles(g))
        if not cycles:
            continue
        model = fit_maxent(g, PriorSpec())
        bits = surprisal_graph(g, model)
        lam = model.rates()
        nats = g.with_weights([mu * lam[u, v] for u, v, mu in g.edges()])
        q = float(rng.uniform(0.01, 0.49))
        p2, pe = params_from_q(q, g.n), params_from_q(q, g.n, log=math.log)
        for idx in rng.choice(len(cycles), min(5, len(cycles), 50 - count), replace=False):
            c = cycles[int(idx)]
            f2, fe = interestingness(c, bits, p2), interestingness(c, nats, pe)
            worst = max(worst, abs(fe - f2) / f2)
            count += 1
    return report(9, "log-base invariance", worst <= 1e-12, f"{count} cycles, max relative deviation {worst:.2g}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_acceptance(crit):
    assert crit()


def main() -> int:
    results = [crit() for crit in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
