"""Pure-Python kernels.

Reference versions of the routines in ``_kernels.pyx``.  They accept any
ordered field type (``float`` or ``fractions.Fraction``), which the exact
decomposition code relies on; the compiled versions are float-only.
"""

from __future__ import annotations

from collections import deque

INF = float("inf")


def held_karp_table(dist):
    """Open-path DP from anchor 0 over subsets of nodes ``1..s``.

    Returns ``dp`` with ``dp[mask][j]`` the cheapest path that starts at
    node 0, visits exactly the nodes in ``mask`` (bit ``j`` = node ``j+1``)
    and ends at node ``j+1``.  Unreachable states hold ``inf``.
    """
    s = len(dist) - 1
    full = 1 << s
    dp = [[INF] * s for _ in range(full)]
    for j in range(s):
        dp[1 << j][j] = dist[0][j + 1]
    for mask in range(1, full):
        row = dp[mask]
        for j in range(s):
            cur = row[j]
            if cur == INF or not (mask >> j) & 1:
                continue
            dj = dist[j + 1]
            for nxt in range(s):
                if (mask >> nxt) & 1:
                    continue
                cand = cur + dj[nxt + 1]
                nm = mask | (1 << nxt)
                if cand < dp[nm][nxt]:
                    dp[nm][nxt] = cand
    return dp


def closed_tour_costs(dist, dp):
    """Cheapest closed tour through anchor 0 and each subset mask."""
    s = len(dist) - 1
    out = [INF] * (1 << s)
    out[0] = 0.0
    for mask in range(1, 1 << s):
        row = dp[mask]
        best = INF
        for j in range(s):
            if (mask >> j) & 1:
                cand = row[j] + dist[j + 1][0]
                if cand < best:
                    best = cand
        out[mask] = best
    return out


def subset_arborescence(w):
    """Cheapest arborescence rooted at node 0 spanning exactly ``{0} | S``.

    ``w[u][v]`` is the cost of arc ``u -> v`` (``None`` when absent).  The
    recurrence peels off a leaf: ``best[S] = min_v best[S - v] + min_{u in
    S - v + root} w[u][v]``.  Returns ``(best, leaf, parent)`` indexed by the
    mask over nodes ``1..n-1``; ``best`` is ``None`` for unreachable sets.
    """
    n = len(w)
    s = n - 1
    full = 1 << s
    best = [None] * full
    leaf = [-1] * full
    parent = [-1] * full
    best[0] = 0
    for mask in range(1, full):
        cur_best = None
        cur_leaf = cur_par = -1
        for j in range(s):
            if not (mask >> j) & 1:
                continue
            rest = mask ^ (1 << j)
            base = best[rest]
            if base is None:
                continue
            v = j + 1
            # cheapest arc into v from the rest of the tree
            arc = w[0][v]
            par = 0 if arc is not None else -1
            for i in range(s):
                if (rest >> i) & 1:
                    a = w[i + 1][v]
                    if a is not None and (arc is None or a < arc):
                        arc, par = a, i + 1
            if arc is None:
                continue
            cand = base + arc
            if cur_best is None or cand < cur_best:
                cur_best, cur_leaf, cur_par = cand, v, par
        best[mask] = cur_best
        leaf[mask] = cur_leaf
        parent[mask] = cur_par
    return best, leaf, parent


def max_flow(cap, s, t):
    """Edmonds-Karp on a dense capacity matrix.

    Returns ``(value, flow)`` with ``flow`` the skew-symmetric net flow.
    Works for any exact or float number type.
    """
    n = len(cap)
    zero = cap[s][t] - cap[s][t]
    flow = [[zero] * n for _ in range(n)]
    value = zero
    if s == t:
        return value, flow
    while True:
        prev = [-1] * n
        prev[s] = s
        queue = deque([s])
        while queue and prev[t] < 0:
            a = queue.popleft()
            ca, fa = cap[a], flow[a]
            for b in range(n):
                if prev[b] < 0 and ca[b] - fa[b] > 0:
                    prev[b] = a
                    queue.append(b)
        if prev[t] < 0:
            return value, flow
        push = None
        b = t
        while b != s:
            a = prev[b]
            r = cap[a][b] - flow[a][b]
            if push is None or r < push:
                push = r
            b = a
        b = t
        while b != s:
            a = prev[b]
            flow[a][b] += push
            flow[b][a] -= push
            b = a
        value += push
