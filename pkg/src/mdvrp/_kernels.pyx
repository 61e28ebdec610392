# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float kernels; see ``_kernels_py`` for the reference versions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def held_karp_table(dist_in):
    cdef double[:, ::1] dist = np.ascontiguousarray(dist_in, dtype=np.float64)
    cdef Py_ssize_t s = dist.shape[0] - 1
    cdef Py_ssize_t full = 1 << s
    dp_arr = np.full((full, max(s, 1)), INFINITY)
    cdef double[:, ::1] dp = dp_arr
    cdef Py_ssize_t mask, j, nxt, nm
    cdef double cur, cand
    for j in range(s):
        dp[1 << j, j] = dist[0, j + 1]
    for mask in range(1, full):
        for j in range(s):
            cur = dp[mask, j]
            if cur == INFINITY or not ((mask >> j) & 1):
                continue
            for nxt in range(s):
                if (mask >> nxt) & 1:
                    continue
                cand = cur + dist[j + 1, nxt + 1]
                nm = mask | (1 << nxt)
                if cand < dp[nm, nxt]:
                    dp[nm, nxt] = cand
    return dp_arr


def closed_tour_costs(dist_in, dp_in):
    cdef double[:, ::1] dist = np.ascontiguousarray(dist_in, dtype=np.float64)
    cdef double[:, ::1] dp = np.ascontiguousarray(dp_in, dtype=np.float64)
    cdef Py_ssize_t s = dist.shape[0] - 1
    out_arr = np.full(1 << s, INFINITY)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t mask, j
    cdef double best, cand
    out[0] = 0.0
    for mask in range(1, 1 << s):
        best = INFINITY
        for j in range(s):
            if (mask >> j) & 1:
                cand = dp[mask, j] + dist[j + 1, 0]
                if cand < best:
                    best = cand
        out[mask] = best
    return out_arr


def subset_arborescence(w_in):
    """Float version; absent arcs are ``inf``.  Unreachable sets get ``inf``."""
    cdef double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t s = n - 1
    cdef Py_ssize_t full = 1 << s
    best_arr = np.full(full, INFINITY)
    leaf_arr = np.full(full, -1, dtype=np.int64)
    par_arr = np.full(full, -1, dtype=np.int64)
    cdef double[::1] best = best_arr
    cdef long long[::1] leaf = leaf_arr
    cdef long long[::1] par = par_arr
    cdef Py_ssize_t mask, j, i, rest, v, p, cur_leaf, cur_par
    cdef double base, arc, a, cand, cur_best
    best[0] = 0.0
    for mask in range(1, full):
        cur_best = INFINITY
        cur_leaf = -1
        cur_par = -1
        for j in range(s):
            if not ((mask >> j) & 1):
                continue
            rest = mask ^ (1 << j)
            base = best[rest]
            if base == INFINITY:
                continue
            v = j + 1
            arc = w[0, v]
            p = 0
            for i in range(s):
                if (rest >> i) & 1:
                    a = w[i + 1, v]
                    if a < arc:
                        arc = a
                        p = i + 1
            if arc == INFINITY:
                continue
            cand = base + arc
            if cand < cur_best:
                cur_best = cand
                cur_leaf = v
                cur_par = p
        best[mask] = cur_best
        leaf[mask] = cur_leaf
        par[mask] = cur_par
    return best_arr, leaf_arr, par_arr


def max_flow(cap_in, Py_ssize_t s, Py_ssize_t t):
    """Edmonds-Karp on a dense float matrix; returns ``(value, net_flow)``."""
    cdef double[:, ::1] cap = np.ascontiguousarray(cap_in, dtype=np.float64)
    cdef Py_ssize_t n = cap.shape[0]
    flow_arr = np.zeros((n, n))
    cdef double[:, ::1] flow = flow_arr
    prev_arr = np.empty(n, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] prev = prev_arr
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t head, tail, a, b
    cdef double value = 0.0, push, r
    if s == t:
        return 0.0, flow_arr
    while True:
        for a in range(n):
            prev[a] = -1
        prev[s] = s
        queue[0] = s
        head = 0
        tail = 1
        while head < tail and prev[t] < 0:
            a = queue[head]
            head += 1
            for b in range(n):
                if prev[b] < 0 and cap[a, b] - flow[a, b] > 0.0:
                    prev[b] = a
                    queue[tail] = b
                    tail += 1
        if prev[t] < 0:
            return value, flow_arr
        push = INFINITY
        b = t
        while b != s:
            a = prev[b]
            r = cap[a, b] - flow[a, b]
            if r < push:
                push = r
            b = a
        b = t
        while b != s:
            a = prev[b]
            flow[a, b] += push
            flow[b, a] -= push
            b = a
        value += push
