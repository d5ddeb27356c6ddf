"""Command-line front end and the iterative mining driver."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .background import (
    InfeasiblePrior,
    MaxEntModel,
    NonConvergence,
    PriorSpec,
    fit_maxent,
    surprisal_graph,
)
from .graph import Cycle, DiGraph, GraphFormatError, load_edge_list
from .interestingness import ICDLParams, dl, interestingness, params_from_q
from .mmc import karp_mmc, karp_variant
from .oracle import BudgetExceeded, EnumerationBudget, enumerate_cycles, exact_kmsic, exact_msic, gen_erdos
from .steiner import SteinerQuery, local_search

log = logging.getLogger("sicycles")

ALGORITHMS = ("karp", "karp-variant", "local-scs", "exact")


@dataclass
class MiningReport:
    params: dict
    cycles: list[dict] = field(default_factory=list)
    status: str = "ok"

    def to_dict(self) -> dict:
        return {"params": self.params, "status": self.status, "cycles": self.cycles}

    def to_tsv(self) -> str:
        rows = ["rank\tf\tic\tdl\tlength\tnodes"]
        for r, c in enumerate(self.cycles, start=1):
            names = c.get("labels") or [str(v) for v in c["nodes"]]
            rows.append(f"{r}\t{c['f']:.12g}\t{c['ic']:.12g}\t{c['dl']:.12g}\t{len(c['nodes'])}\t{','.join(names)}")
        return "\n".join(rows) + "\n"


def describe_cycle(cycle: Cycle, graph: DiGraph, sg: DiGraph, base_sg: DiGraph, p: ICDLParams) -> dict:
    """Report entry: per-edge weight, current surprisal, survival and weight shares."""
    out_s, in_s = graph.out_strength(), graph.in_strength()
    edges = []
    for u, v in cycle.edges():
        mu = graph.w(u, v)
        edges.append({
            "src": u,
            "dst": v,
            "mu": mu,
            "w": sg.w(u, v),
            "survival": 2.0 ** (-base_sg.w(u, v)),
            "frac_in": mu / in_s[v] if in_s[v] > 0 else 0.0,
            "frac_out": mu / out_s[u] if out_s[u] > 0 else 0.0,
        })
    ic_value = math.fsum(e["w"] for e in edges)
    entry = {
        "nodes": list(cycle.nodes),
        "edges": edges,
        "ic": ic_value,
        "dl": dl(len(cycle), p),
        "f": ic_value / dl(len(cycle), p),
    }
    if graph.labels is not None:
        entry["labels"] = [graph.label(v) for v in cycle.nodes]
    return entry


def solve(algorithm: str, graph: DiGraph, sg: DiGraph, p: ICDLParams,
          query: SteinerQuery | None = None, budget: EnumerationBudget | None = None) -> Cycle | None:
    if algorithm == "karp":
        res = karp_mmc(sg)
        return res[1] if res else None
    if algorithm == "karp-variant":
        return karp_variant(sg, p)
    if algorithm == "local-scs":
        if query is None:
            raise ValueError("local-scs needs terminals")
        res = local_search(graph, sg, query, p)
        return res.cycle if res else None
    if algorithm == "exact":
        res = exact_kmsic(graph, sg, p, query.terminals, budget) if query else exact_msic(graph, sg, p, budget)
        return res[0] if res else None
    raise ValueError(f"unknown algorithm {algorithm!r}")


def mine_iterative(graph: DiGraph, model: MaxEntModel | None, p: ICDLParams, algorithm: str,
                   top_k: int, query: SteinerQuery | None = None,
                   budget: EnumerationBudget | None = None, sg: DiGraph | None = None) -> MiningReport:
    """Mine ``top_k`` cycles, zeroing the surprisal of every emitted edge.

    The background model is not refitted between rounds. Stops early when the
    solver finds nothing or the best cycle carries no information. A
    precomputed surprisal graph ``sg`` overrides ``model``.
    """
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    base_sg = sg if sg is not None else surprisal_graph(graph, model)
    weights = base_sg.weight.copy()
    report = MiningReport(params={
        "q": p.q, "alpha": p.alpha, "beta": p.beta, "n": p.n, "algorithm": algorithm,
        "seed": query.seed if query else None,
        "terminals": list(query.terminals) if query else None,
        "l_max": query.l_max if query else None,
        "uniform": model is None and sg is None, "backend": kernels.BACKEND,
    })
    for _ in range(top_k):
        sg = base_sg.with_weights(weights)
        try:
            cycle = solve(algorithm, graph, sg, p, query, budget)
        except (BudgetExceeded, RuntimeError) as exc:
            report.status = f"error: {exc}"
            break
        if cycle is None or interestingness(cycle, sg, p) <= 0:
            break
        report.cycles.append(describe_cycle(cycle, graph, sg, base_sg, p))
        for u, v in cycle.edges():
            weights[sg.edge_index[(u, v)]] = 0.0
    if not report.cycles and report.status == "ok":
        report.status = "none found"
    return report


# ---------------------------------------------------------------- argument handling


def _terminals(args, graph: DiGraph) -> tuple[int, ...]:
    raw: list[str] = []
    if args.terminals:
        raw += [t for t in args.terminals.split(",") if t.strip()]
    if getattr(args, "terminals_file", None):
        raw += Path(args.terminals_file).read_text(encoding="utf-8").split()
    if not raw:
        raise ValueError("no terminals given")
    names = {graph.label(v): v for v in range(graph.n)} if graph.labels else {}
    out = []
    for tok in raw:
        tok = tok.strip()
        if tok in names:
            out.append(names[tok])
        else:
            out.append(int(tok))
    return tuple(out)


def _load_graph(args) -> DiGraph:
    return load_edge_list(args.graph, integer_ids=not args.string_ids, labels_path=args.labels,
                          allow_self_loops=not args.no_self_loops)


def _prior(args, graph: DiGraph) -> PriorSpec:
    if args.prior in (None, "degrees"):
        return PriorSpec(degree_prior=True)
    return PriorSpec.load(args.prior, graph)


def _model(args, graph: DiGraph) -> MaxEntModel | None:
    if getattr(args, "uniform", False):
        return None
    if getattr(args, "model", None):
        model = MaxEntModel.load(args.model)
        if model.n != graph.n:
            raise ValueError(f"model has {model.n} nodes but the graph has {graph.n}")
        return model
    return fit_maxent(graph, _prior(args, graph), tol=args.tol, max_iters=args.max_iters)


def _query(args, graph: DiGraph) -> SteinerQuery:
    terms = _terminals(args, graph)
    return SteinerQuery(terms, args.lmax if args.lmax else graph.n, args.restarts, args.seed)


def _emit(report: MiningReport, args) -> None:
    text = json.dumps(report.to_dict(), indent=1) if args.output == "json" else report.to_tsv()
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_fit(args) -> int:
    graph = _load_graph(args)
    model = fit_maxent(graph, _prior(args, graph), tol=args.tol, max_iters=args.max_iters)
    data = model.to_dict()
    data["expected"] = np.round(model.expected(), 10).tolist()
    text = json.dumps(data, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_msic(args) -> int:
    graph = _load_graph(args)
    p = params_from_q(args.q, graph.n)
    budget = EnumerationBudget(args.max_cycles)
    report = mine_iterative(graph, _model(args, graph), p, args.algorithm, 1, budget=budget)
    _emit(report, args)
    return 0


def cmd_kmsic(args) -> int:
    graph = _load_graph(args)
    p = params_from_q(args.q, graph.n)
    algorithm = "exact" if args.exact else "local-scs"
    report = mine_iterative(graph, _model(args, graph), p, algorithm, 1, _query(args, graph),
                            EnumerationBudget(args.max_cycles))
    _emit(report, args)
    return 0


def cmd_mine(args) -> int:
    graph = _load_graph(args)
    p = params_from_q(args.q, graph.n)
    query = _query(args, graph) if (args.terminals or args.terminals_file) else None
    if args.algorithm == "local-scs" and query is None:
        raise ValueError("local-scs mining needs --terminals")
    report = mine_iterative(graph, _model(args, graph), p, args.algorithm, args.top_k, query,
                            EnumerationBudget(args.max_cycles))
    _emit(report, args)
    return 0


def cmd_enumerate(args) -> int:
    graph = _load_graph(args)
    count = 0
    out = sys.stdout
    for cyc in enumerate_cycles(graph, EnumerationBudget(args.max_cycles)):
        count += 1
        if not args.count_only:
            out.write("\t".join(graph.label(v) for v in cyc.nodes) + "\n")
    if args.count_only:
        print(count)
    return 0


def _bench_instance(task):
    seed, n, prob, w_lo, w_hi, q, k, lmax, restarts, max_cycles = task
    g = gen_erdos(n, prob, w_lo, w_hi, seed)
    p = params_from_q(q, n)
    rows = []

    def timed(name, fn):
        t0 = time.perf_counter()
        cyc = fn()
        dt = time.perf_counter() - t0
        f = interestingness(cyc, g, p) if cyc is not None else float("nan")
        rows.append((seed, name, f, len(cyc) if cyc is not None else 0, dt))

    query = None
    if k:
        rng = np.random.default_rng([seed, 7])
        terms = tuple(int(t) for t in rng.choice(n, size=k, replace=False))
        query = SteinerQuery(terms, lmax or n, restarts, seed)
    budget = EnumerationBudget(max_cycles)
    timed("exact", lambda: solve("exact", g, g, p, query, budget))
    if query is None:
        timed("karp", lambda: solve("karp", g, g, p))
        timed("karp-variant", lambda: solve("karp-variant", g, g, p))
    else:
        timed("local-scs", lambda: solve("local-scs", g, g, p, query))
    return rows


def cmd_bench(args) -> int:
    tasks = [
        (args.seed + i, args.n, args.p, args.w_lo, args.w_hi, args.q, args.k, args.lmax, args.restarts,
         args.max_cycles)
        for i in range(args.instances)
    ]
    if args.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_bench_instance, tasks))
    else:
        results = [_bench_instance(t) for t in tasks]
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(["seed", "algorithm", "F", "cycle_length", "runtime_s"])
        for rows in results:
            for seed, name, f, length, dt in rows:
                writer.writerow([seed, name, f"{f:.12g}", length, f"{dt:.6f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sicycles", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_args(sp):
        sp.add_argument("graph", help="edge list: src<TAB>dst<TAB>weight")
        sp.add_argument("--labels", help="id<TAB>label file")
        sp.add_argument("--string-ids", action="store_true", help="node tokens are labels, numbered by first appearance")
        sp.add_argument("--no-self-loops", action="store_true", help="drop self-loops while loading")

    def model_args(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--uniform", action="store_true", help="no prior: every edge carries one bit")
        g.add_argument("--model", help="fitted model JSON from 'fit'")
        g.add_argument("--prior", help="'degrees' (default) or a prior JSON file; fitted on the fly")
        sp.add_argument("--tol", type=float, default=1e-6)
        sp.add_argument("--max-iters", type=int, default=10_000)

    def common(sp):
        sp.add_argument("--q", type=float, default=0.01)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--lmax", type=int, default=None)
        sp.add_argument("--restarts", type=int, default=5)
        sp.add_argument("--output", choices=("json", "tsv"), default="json")
        sp.add_argument("-o", "--out", help="write to this file instead of stdout")
        sp.add_argument("--max-cycles", type=int, default=10_000_000)

    def terminal_args(sp, required=False):
        sp.add_argument("--terminals", required=False, help="comma-separated node ids or labels")
        sp.add_argument("--terminals-file", help="whitespace-separated node ids or labels")

    sp = sub.add_parser("fit", help="fit the background model and write it as JSON")
    graph_args(sp)
    sp.add_argument("--prior", default="degrees")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--max-iters", type=int, default=10_000)
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("msic", help="most interesting cycle")
    graph_args(sp)
    model_args(sp)
    common(sp)
    sp.add_argument("--algorithm", choices=("karp", "karp-variant", "exact"), default="karp")
    sp.set_defaults(func=cmd_msic)

    sp = sub.add_parser("kmsic", help="most interesting cycle through given terminals")
    graph_args(sp)
    model_args(sp)
    common(sp)
    terminal_args(sp)
    sp.add_argument("--exact", action="store_true", help="exhaustive search instead of local search")
    sp.set_defaults(func=cmd_kmsic)

    sp = sub.add_parser("mine", help="iteratively mine the top-k cycles")
    graph_args(sp)
    model_args(sp)
    common(sp)
    terminal_args(sp)
    sp.add_argument("--algorithm", choices=ALGORITHMS, default="karp")
    sp.add_argument("--top-k", type=int, default=3)
    sp.set_defaults(func=cmd_mine)

    sp = sub.add_parser("enumerate", help="list all simple cycles")
    graph_args(sp)
    sp.add_argument("--max-cycles", type=int, default=10_000_000)
    sp.add_argument("--count-only", action="store_true")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("bench", help="random-instance benchmark, CSV output")
    sp.add_argument("--instances", type=int, default=20)
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--p", type=float, default=0.2)
    sp.add_argument("--w-lo", type=int, default=1)
    sp.add_argument("--w-hi", type=int, default=10_000)
    sp.add_argument("--q", type=float, default=0.1)
    sp.add_argument("--k", type=int, default=0, help="terminals per instance; 0 benchmarks the MSIC solvers")
    sp.add_argument("--lmax", type=int, default=None)
    sp.add_argument("--restarts", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-cycles", type=int, default=100_000_000)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_bench)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GraphFormatError, OSError, ValueError, KeyError, NonConvergence, InfeasiblePrior,
            BudgetExceeded, json.JSONDecodeError) as exc:
        print(f"sicycles: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
