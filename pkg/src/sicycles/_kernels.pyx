# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same signatures as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, isfinite
from libc.stdint cimport uint64_t
from libcpp.vector cimport vector

cnp.import_array()


def karp_table(Py_ssize_t n, src, dst, weight):
    cdef Py_ssize_t levels = n + 2
    D_arr = np.full((levels, n), np.inf)
    pred_arr = np.full((levels, n), -1, dtype=np.int64)
    if n == 0:
        return D_arr, pred_arr
    cdef double[:, ::1] D = D_arr
    cdef long long[:, ::1] pred = pred_arr
    order = np.lexsort((np.asarray(src), np.asarray(dst)))
    cdef long long[::1] es = np.ascontiguousarray(np.asarray(src, dtype=np.int64)[order])
    cdef long long[::1] ed = np.ascontiguousarray(np.asarray(dst, dtype=np.int64)[order])
    cdef double[::1] ew = np.ascontiguousarray(np.asarray(weight, dtype=np.float64)[order])
    cdef Py_ssize_t m = es.shape[0], k, e, v
    cdef long long u
    cdef double du
    for v in range(n):
        D[1, v] = 0.0
    for k in range(2, levels):
        for e in range(m):
            u = es[e]
            du = D[k - 1, u]
            if du != INFINITY:
                v = ed[e]
                if du + ew[e] < D[k, v]:
                    D[k, v] = du + ew[e]
                    pred[k, v] = u
    return D_arr, pred_arr


cdef class _Johnson:
    """Resumable iterative Johnson search over a CSR digraph."""

    cdef int n
    cdef int[::1] indptr
    cdef int[::1] indices
    cdef double[::1] weights
    cdef vector[char] active
    cdef vector[char] incomp
    cdef vector[char] blocked
    cdef vector[char] closed
    cdef vector[vector[int]] B
    cdef vector[int] path
    cdef vector[int] cursor
    cdef vector[double] pw
    cdef vector[int] work
    cdef int s
    cdef bint started

    def __init__(self, int n, indptr, indices, weights):
        self.n = n
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int32)
        self.indices = np.ascontiguousarray(indices, dtype=np.int32)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.active.assign(n, 1)
        self.incomp.assign(n, 0)
        self.blocked.assign(n, 0)
        self.B.resize(n)
        self.s = -1
        self.started = False

    cdef void _component(self, int s):
        # forward reach within active, then backward reach restricted to it
        cdef int u, v, p
        cdef vector[char] fwd
        fwd.assign(self.n, 0)
        self.work.clear()
        self.work.push_back(s)
        fwd[s] = 1
        while self.work.size():
            u = self.work.back()
            self.work.pop_back()
            for p in range(self.indptr[u], self.indptr[u + 1]):
                v = self.indices[p]
                if self.active[v] and not fwd[v]:
                    fwd[v] = 1
                    self.work.push_back(v)
        # reverse reachability via repeated scans over fwd nodes
        for u in range(self.n):
            self.incomp[u] = 0
        self.incomp[s] = 1
        cdef bint changed = True
        while changed:
            changed = False
            for u in range(self.n):
                if fwd[u] and not self.incomp[u]:
                    for p in range(self.indptr[u], self.indptr[u + 1]):
                        if self.incomp[self.indices[p]]:
                            self.incomp[u] = 1
                            changed = True
                            break

    cdef bint _start_next(self):
        # advance to the next root with a nontrivial search; False when done
        cdef int u, p
        while True:
            if self.s >= 0:
                self.active[self.s] = 0
            self.s += 1
            if self.s >= self.n:
                return False
            self._component(self.s)
            for p in range(self.indptr[self.s], self.indptr[self.s + 1]):
                if self.incomp[self.indices[p]]:
                    break
            else:
                continue
            for u in range(self.n):
                self.blocked[u] = 0
                self.B[u].clear()
            self.path.clear()
            self.cursor.clear()
            self.pw.clear()
            self.closed.clear()
            self.path.push_back(self.s)
            self.cursor.push_back(self.indptr[self.s])
            self.pw.push_back(0.0)
            self.closed.push_back(0)
            self.blocked[self.s] = 1
            return True

    cdef int _step(self, double* total):
        # run until the next circuit (returns its length) or exhaustion (0)
        cdef int top, u, w, p, v, q, x
        cdef double wt
        cdef vector[int] todo
        if not self.started:
            self.started = True
            if not self._start_next():
                return 0
        while True:
            while self.path.size():
                top = self.path.size() - 1
                u = self.path[top]
                p = self.cursor[top]
                if p < self.indptr[u + 1]:
                    self.cursor[top] = p + 1
                    w = self.indices[p]
                    if not self.incomp[w]:
                        continue
                    wt = self.weights[p]
                    if w == self.s:
                        self.closed[top] = 1
                        total[0] = self.pw[top] + wt
                        return top + 1
                    if not self.blocked[w]:
                        self.path.push_back(w)
                        self.cursor.push_back(self.indptr[w])
                        self.pw.push_back(self.pw[top] + wt)
                        self.closed.push_back(0)
                        self.blocked[w] = 1
                    continue
                v = u
                self.path.pop_back()
                self.cursor.pop_back()
                self.pw.pop_back()
                if self.closed[top]:
                    self.closed.pop_back()
                    if self.closed.size():
                        self.closed[self.closed.size() - 1] = 1
                    todo.clear()
                    todo.push_back(v)
                    while todo.size():
                        x = todo.back()
                        todo.pop_back()
                        if self.blocked[x]:
                            self.blocked[x] = 0
                            for q in range(<int>self.B[x].size()):
                                todo.push_back(self.B[x][q])
                            self.B[x].clear()
                else:
                    self.closed.pop_back()
                    for p in range(self.indptr[v], self.indptr[v + 1]):
                        w = self.indices[p]
                        if self.incomp[w]:
                            # set semantics: skip if already recorded
                            for q in range(<int>self.B[w].size()):
                                if self.B[w][q] == v:
                                    break
                            else:
                                self.B[w].push_back(v)
            if not self._start_next():
                return 0


def johnson_cycles(int n, indptr, indices, Py_ssize_t batch_size=4096):
    cdef _Johnson J = _Johnson(n, indptr, indices, np.zeros(len(indices)))
    cdef double total
    cdef int L, i
    batch = []
    while True:
        L = J._step(&total)
        if L == 0:
            break
        batch.append(tuple([J.path[i] for i in range(L)]))
        if len(batch) >= batch_size:
            yield batch
            batch = []
    if batch:
        yield batch


def johnson_profile(int n, indptr, indices, weights, masks, long long max_cycles):
    cdef _Johnson J = _Johnson(n, indptr, indices, weights)
    cdef Py_ssize_t rows = len(masks) + 1
    req_arr = np.zeros(rows, dtype=np.uint64)
    if len(masks):
        req_arr[1:] = np.asarray(masks, dtype=np.uint64)
    cdef uint64_t[::1] req = req_arr
    best_w_arr = np.full((rows, n + 1), -np.inf)
    best_nodes_arr = np.full((rows, n + 1, max(n, 1)), -1, dtype=np.int32)
    cdef double[:, ::1] best_w = best_w_arr
    cdef int[:, :, ::1] best_nodes = best_nodes_arr
    cdef long long count = 0
    cdef double total
    cdef int L, i, r
    cdef uint64_t cmask
    cdef bint better
    while True:
        L = J._step(&total)
        if L == 0:
            break
        count += 1
        if count > max_cycles:
            break
        cmask = 0
        if rows > 1:
            for i in range(L):
                cmask |= (<uint64_t>1) << J.path[i]
        for r in range(rows):
            if (cmask & req[r]) != req[r]:
                continue
            if total > best_w[r, L]:
                better = True
            elif total == best_w[r, L]:
                better = False
                for i in range(L):
                    if J.path[i] != best_nodes[r, L, i]:
                        better = J.path[i] < best_nodes[r, L, i]
                        break
            else:
                better = False
            if better:
                best_w[r, L] = total
                for i in range(L):
                    best_nodes[r, L, i] = J.path[i]
    return count, best_w_arr, best_nodes_arr


def best_reorder(M_in, bint quad):
    cdef double[:, ::1] M = np.ascontiguousarray(M_in, dtype=np.float64)
    cdef int L = M.shape[0]
    cdef int i, j, k, l, i1, j1, k1, l1
    cdef double best = -INFINITY, removed, added, delta
    cdef int bi = -1, bj = -1, bk = -1, bl = -1
    if not quad:
        for i in range(L):
            i1 = (i + 1) % L
            for j in range(i + 1, L):
                j1 = (j + 1) % L
                if not isfinite(M[i, j1]):
                    continue
                for k in range(j + 1, L):
                    k1 = (k + 1) % L
                    added = M[i, j1] + M[j, k1] + M[k, i1]
                    if not isfinite(added):
                        continue
                    removed = M[i, i1] + M[j, j1] + M[k, k1]
                    delta = added - removed
                    if delta > best:
                        best = delta
                        bi, bj, bk = i, j, k
        return best, bi, bj, bk, -1
    for i in range(L):
        i1 = (i + 1) % L
        for j in range(i + 1, L):
            j1 = (j + 1) % L
            for k in range(j + 1, L):
                k1 = (k + 1) % L
                if not isfinite(M[i, k1]) or not isfinite(M[k, i1]):
                    continue
                for l in range(k + 1, L):
                    l1 = (l + 1) % L
                    added = M[i, k1] + M[l, j1] + M[k, i1] + M[j, l1]
                    if not isfinite(added):
                        continue
                    removed = M[i, i1] + M[j, j1] + M[k, k1] + M[l, l1]
                    delta = added - removed
                    if delta > best:
                        best = delta
                        bi, bj, bk, bl = i, j, k, l
    return best, bi, bj, bk, bl
