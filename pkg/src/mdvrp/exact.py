"""Exact optimum for tiny instances by subset dynamic programming."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .instance import Instance, Solution, Tour, make_tour

MAX_GROUP = 12
MAX_CLIENTS = 10


class TooLargeError(ValueError):
    pass


def _trace_order(dist: np.ndarray, dp: np.ndarray, mask: int) -> list[int]:
    """Recover the visiting order (local indices 1..s) of the best closed tour on ``mask``."""
    s = dist.shape[0] - 1
    ends = [j for j in range(s) if (mask >> j) & 1]
    end = min(ends, key=lambda j: (dp[mask, j] + dist[j + 1, 0], j))
    order = []
    while mask:
        order.append(end + 1)
        prev_mask = mask ^ (1 << end)
        if not prev_mask:
            break
        target = dp[mask, end]
        cands = [i for i in range(s) if (prev_mask >> i) & 1]
        end = min(cands, key=lambda i: (abs(dp[prev_mask, i] + dist[i + 1, end + 1] - target), i))
        mask = prev_mask
    order.reverse()
    return order


def _depot_tables(inst: Instance, clients: Sequence[int]):
    for r in inst.depot_indices:
        idx = [r, *clients]
        dist = inst.cost[np.ix_(idx, idx)]
        dp = kernels.held_karp_table(dist)
        yield r, dist, dp, kernels.closed_tour_costs(dist, dp)


def optimal_tour_for_group(inst: Instance, group: Sequence[int]) -> Tour:
    """Cheapest single tour over all depots visiting exactly ``group``."""
    group = sorted(group)
    if not group:
        raise ValueError("empty group")
    if len(group) > min(inst.k, MAX_GROUP):
        raise TooLargeError(f"group of {len(group)} exceeds capacity or DP limit")
    full = (1 << len(group)) - 1
    best = None
    for r, dist, dp, closed in _depot_tables(inst, group):
        if best is None or closed[full] < best[0]:
            best = (closed[full], r, dist, dp)
    _, r, dist, dp = best
    order = _trace_order(dist, dp, full)
    return make_tour(inst, r, [group[i - 1] for i in order])


def brute_force_opt(inst: Instance) -> Solution:
    """Exact optimum: ``f(S) = min_T f(S - T) + tour(T)`` over groups ``|T| <= k``.

    Groups always contain the lowest client of ``S``; among equal-cost
    choices the numerically smallest group mask wins.
    """
    n = inst.n
    if n > MAX_CLIENTS:
        raise TooLargeError(f"{n} clients; brute force supports at most {MAX_CLIENTS}")
    clients = list(inst.client_indices)
    full = (1 << n) - 1
    group_cost = np.full(full + 1, math.inf)
    group_depot = np.zeros(full + 1, dtype=int)
    tables = {}
    for r, dist, dp, closed in _depot_tables(inst, clients):
        tables[r] = (dist, dp)
        better = closed < group_cost
        group_cost[better] = closed[better]
        group_depot[better] = r
    sizes = np.array([bin(m).count("1") for m in range(full + 1)])
    group_cost[sizes > inst.k] = math.inf

    @lru_cache(maxsize=None)
    def f(mask: int) -> tuple[float, int]:
        if mask == 0:
            return 0.0, 0
        low = mask & -mask
        rest = mask ^ low
        best_val, best_grp = math.inf, 0
        sub = rest
        while True:
            grp = sub | low
            gc = group_cost[grp]
            if gc < math.inf:
                val = f(mask ^ grp)[0] + gc
                if val < best_val - 1e-12 or (abs(val - best_val) <= 1e-12 and grp < best_grp):
                    best_val, best_grp = val, grp
            if sub == 0:
                break
            sub = (sub - 1) & rest
        return best_val, best_grp

    tours = []
    mask = full
    while mask:
        grp = f(mask)[1]
        r = int(group_depot[grp])
        dist, dp = tables[r]
        order = _trace_order(dist, dp, grp)
        tours.append(make_tour(inst, r, [clients[i - 1] for i in order]))
        mask ^= grp
    f.cache_clear()
    return Solution(tuple(tours))
