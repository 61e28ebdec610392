"""Independent brute-force oracles shared by the unit and acceptance tests."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from mdvrp.decomposition import Branching, is_branching


def cut_by_enumeration(caps, s, t, nodes):
    best = None
    others = [v for v in nodes if v not in (s, t)]
    for size in range(len(others) + 1):
        for extra in itertools.combinations(others, size):
            S = {t, *extra}
            val = sum(c for (a, b), c in caps.items() if b in S and a not in S)
            best = val if best is None else min(best, val)
    return best


def all_branchings(root, nodes, arcs):
    """Every ``root``-branching using arcs of ``arcs`` (oracle helper)."""
    parents = {v: [None] + [a for a, b in arcs if b == v] for v in nodes if v != root}
    keys = sorted(parents)
    out = []
    for choice in itertools.product(*(parents[v] for v in keys)):
        b = Branching(root, frozenset((p, v) for v, p in zip(keys, choice) if p is not None))
        if is_branching(b):
            out.append(b)
    return out


def feasible_by_enumeration(f, root, budget, profile) -> bool:
    nodes = sorted({root} | {x for e in f for x in e})
    arcs = sorted(e for e, v in f.items() if v > 0)
    brs = all_branchings(root, nodes, arcs)
    A_ub, b_ub = [], []
    for e in arcs:
        A_ub.append([1.0 if e in b.arcs else 0.0 for b in brs])
        b_ub.append(float(f[e]))
    for v, lam in profile.items():
        A_ub.append([-1.0 if v in b.nodes else 0.0 for b in brs])
        b_ub.append(-float(min(budget, lam)))
    res = linprog(np.zeros(len(brs)), A_ub=A_ub or None, b_ub=b_ub or None,
                  A_eq=[[1.0] * len(brs)], b_eq=[float(budget)], bounds=(0, None), method="highs")
    return res.status == 0
