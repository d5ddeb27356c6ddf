"""Compiled vs pure-Python kernels on the same random instances.

    python benchmarks/bench_kernels.py [--n 20] [--p 0.2] [--repeats 3]
"""

import argparse
import time

import numpy as np

from sicycles import _pykernels as pure
from sicycles import kernels
from sicycles.oracle import gen_erdos


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--p", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled extension not built; run `pip install --no-build-isolation -e .`")

    g = gen_erdos(args.n, args.p, 1, 10_000, args.seed)
    indptr, indices, weights = g.csr()
    masks = np.array([1, 0b11110], dtype=np.uint64)
    M = np.random.default_rng(args.seed).uniform(0, 10, (20, 20))

    cases = {
        "johnson_profile": lambda b: b.johnson_profile(g.n, indptr, indices, weights, masks, 10**9),
        "karp_table": lambda b: b.karp_table(g.n, g.src, g.dst, -g.weight),
        "best_reorder(quad, L=20)": lambda b: b.best_reorder(M, True),
    }
    print(f"graph n={g.n} m={g.m}")
    print(f"{'kernel':34s} {'compiled s':>12s} {'python s':>12s} {'speedup':>9s}")
    for name, fn in cases.items():
        tc, out_c = best_of(lambda: fn(kernels.compiled), args.repeats)
        tp, out_p = best_of(lambda: fn(pure), 1)
        if name == "johnson_profile":
            assert out_c[0] == out_p[0]
            name += f" [{out_c[0]} cycles]"
        print(f"{name:34s} {tc:12.4f} {tp:12.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
