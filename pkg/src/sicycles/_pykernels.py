"""Pure-Python implementations of the hot kernels.

Signatures mirror the compiled ``_kernels`` module exactly; ``kernels``
picks one of the two at import time.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

INF = float("inf")


def karp_table(n, src, dst, weight):
    """Minimum-weight edge progressions from a virtual super-source.

    The super-source has zero-weight edges to every node, so row 1 is all
    zeros and row ``k`` holds walks of ``k - 1`` real edges. Returns
    ``(D, pred)`` of shape ``(n + 2, n)``; ``pred`` is ``-1`` for the
    super-source and for unreachable entries.
    """
    levels = n + 2
    D = np.full((levels, n), INF)
    pred = np.full((levels, n), -1, dtype=np.int64)
    if n == 0:
        return D, pred
    D[1, :] = 0.0
    order = sorted(range(len(src)), key=lambda e: (int(dst[e]), int(src[e])))
    edges = [(int(src[e]), int(dst[e]), float(weight[e])) for e in order]
    for k in range(2, levels):
        prev, row, prow = D[k - 1].tolist(), [INF] * n, [-1] * n
        for u, v, w in edges:
            du = prev[u]
            if du != INF and du + w < row[v]:
                row[v] = du + w
                prow[v] = u
        D[k] = row
        pred[k] = prow
    return D, pred


def _scc_containing(s, n, indptr, indices, active):
    """Nodes of the strongly connected component of ``s`` within ``active``."""
    fwd = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if active[v] and v not in fwd:
                fwd.add(v)
                stack.append(v)
    radj: dict[int, list[int]] = {}
    for u in fwd:
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if v in fwd:
                radj.setdefault(v, []).append(u)
    comp = {s}
    stack = [s]
    while stack:
        v = stack.pop()
        for u in radj.get(v, ()):
            if u not in comp:
                comp.add(u)
                stack.append(u)
    return comp


def _circuits(n, indptr, indices, weights):
    """Johnson's algorithm; yields ``(path, weight_sum)`` in canonical rotation.

    Every cycle starts at its smallest node because the search rooted at
    ``s`` only visits nodes ``>= s`` of the component of ``s``.
    """
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    weights = [float(x) for x in weights]
    active = [True] * n
    for s in range(n):
        comp = _scc_containing(s, n, indptr, indices, active)
        active[s] = False
        adj = {
            u: [(indices[p], weights[p]) for p in range(indptr[u], indptr[u + 1])
                if indices[p] in comp]
            for u in comp
        }
        if not adj[s]:
            continue
        blocked = {s}
        B: dict[int, set[int]] = {}
        path = [s]
        pw = [0.0]
        stack = [iter(adj[s])]
        closed = [False]
        while stack:
            for w, wt in stack[-1]:
                if w == s:
                    yield path, pw[-1] + wt
                    closed[-1] = True
                elif w not in blocked:
                    path.append(w)
                    pw.append(pw[-1] + wt)
                    closed.append(False)
                    stack.append(iter(adj[w]))
                    blocked.add(w)
                    break
            else:
                stack.pop()
                v = path.pop()
                pw.pop()
                if closed.pop():
                    if closed:
                        closed[-1] = True
                    todo = {v}
                    while todo:
                        u = todo.pop()
                        if u in blocked:
                            blocked.discard(u)
                            todo.update(B.pop(u, ()))
                else:
                    for w, _ in adj[v]:
                        B.setdefault(w, set()).add(v)


def johnson_cycles(n, indptr, indices, batch_size=4096):
    """Yield lists of canonical cycles (tuples), ``batch_size`` at a time."""
    batch = []
    dummy = np.zeros(len(indices))
    for path, _ in _circuits(n, indptr, indices, dummy):
        batch.append(tuple(path))
        if len(batch) >= batch_size:
            yield batch
            batch = []
    if batch:
        yield batch


def johnson_profile(n, indptr, indices, weights, masks, max_cycles):
    """Heaviest cycle of every length, overall and per terminal mask.

    Row 0 of the result is unconstrained; row ``r + 1`` only considers cycles
    whose node bitmask covers ``masks[r]``. Ties keep the lexicographically
    smaller canonical cycle. Returns ``(count, best_w, best_nodes)`` where
    ``count`` exceeds ``max_cycles`` if the budget was hit.
    """
    rows = len(masks) + 1
    req = [0] + [int(m) for m in masks]
    best_w = np.full((rows, n + 1), -INF)
    best_nodes = np.full((rows, n + 1, max(n, 1)), -1, dtype=np.int32)
    best_paths: list[list[tuple | None]] = [[None] * (n + 1) for _ in range(rows)]
    count = 0
    for path, total in _circuits(n, indptr, indices, weights):
        count += 1
        if count > max_cycles:
            break
        L = len(path)
        cmask = 0
        for v in path:
            cmask |= 1 << v
        for r in range(rows):
            if cmask & req[r] != req[r]:
                continue
            cur = best_w[r, L]
            if total > cur or (total == cur and tuple(path) < best_paths[r][L]):
                best_w[r, L] = total
                best_paths[r][L] = tuple(path)
    for r in range(rows):
        for L in range(n + 1):
            if best_paths[r][L] is not None:
                best_nodes[r, L, :L] = best_paths[r][L]
    return count, best_w, best_nodes


@lru_cache(maxsize=64)
def _combos(L, r):
    if L < r:
        return np.zeros((0, r), dtype=np.int64)
    return np.array(list(combinations(range(L), r)), dtype=np.int64).reshape(-1, r)


def best_reorder(M, quad):
    """Best segment-reordering move on a cycle of length ``L``.

    ``M[a, b]`` is the weight of the edge from cycle position ``a`` to
    position ``b`` (``-inf`` if absent). Returns ``(delta_ic, i, j, k, l)``
    for the lexicographically first maximiser (``l = -1`` for the
    three-edge move) or ``(-inf, -1, -1, -1, -1)`` when nothing is legal.
    """
    M = np.asarray(M, dtype=np.float64)
    L = M.shape[0]
    r = 4 if quad else 3
    idx = _combos(L, r)
    if len(idx) == 0:
        return -INF, -1, -1, -1, -1
    nxt = (idx + 1) % L
    removed = M[idx, nxt].sum(axis=1)
    if quad:
        i, j, k, l = idx.T
        i1, j1, k1, l1 = nxt.T
        added = M[i, k1] + M[l, j1] + M[k, i1] + M[j, l1]
    else:
        i, j, k = idx.T
        i1, j1, k1 = nxt.T
        added = M[i, j1] + M[j, k1] + M[k, i1]
    with np.errstate(invalid="ignore"):
        delta = added - removed
    delta[~np.isfinite(added)] = -INF
    best = int(np.argmax(delta))
    if delta[best] == -INF:
        return -INF, -1, -1, -1, -1
    t = idx[best].tolist()
    return float(delta[best]), t[0], t[1], t[2], (t[3] if quad else -1)
