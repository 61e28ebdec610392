"""Weighted branching decomposition of a preflow.

Given an ``r``-preflow ``f`` and a budget ``K``, find ``r``-branchings
``B_i`` with weights ``mu_i > 0`` summing to ``K`` such that every arc
carries at most ``f_e`` weight and every node ``v`` lies on at least
``min(K, lambda_v)`` weight, ``lambda_v`` being its ``r -> v`` connectivity.

The weights come from an exact column-generation LP over branchings.  The
pricing problem (most profitable branching under the current duals) is
solved exactly by the subset DP in :mod:`mdvrp.kernels`; the float result is
re-checked in rational arithmetic and, if the float DP finds nothing, the
DP is rerun on ``Fraction`` duals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .flow import Preflow, connectivity_profile
from .simplex import RevisedSimplex

log = logging.getLogger(__name__)

MAX_SUPPORT_NODES = 22
MAX_COLUMNS = 5000


class DecompositionError(RuntimeError):
    """The decomposition could not be certified; names the failed invariant."""


@dataclass(frozen=True)
class Branching:
    root: int
    arcs: frozenset[tuple[int, int]]

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset({self.root} | {b for _, b in self.arcs})

    def parent(self) -> dict[int, int]:
        return {b: a for a, b in self.arcs}

    def children(self) -> dict[int, list[int]]:
        ch: dict[int, list[int]] = {}
        for a, b in sorted(self.arcs):
            ch.setdefault(a, []).append(b)
        return ch


@dataclass
class WeightedBranchingSet:
    root: int
    budget: Fraction
    items: list[tuple[Branching, Fraction]]

    def total(self) -> Fraction:
        return sum((mu for _, mu in self.items), Fraction(0))

    def arc_load(self) -> dict[tuple[int, int], Fraction]:
        load: dict[tuple[int, int], Fraction] = {}
        for b, mu in self.items:
            for e in b.arcs:
                load[e] = load.get(e, Fraction(0)) + mu
        return load

    def coverage(self) -> dict[int, Fraction]:
        cov: dict[int, Fraction] = {}
        for b, mu in self.items:
            for v in b.nodes:
                if v != self.root:
                    cov[v] = cov.get(v, Fraction(0)) + mu
        return cov


def is_branching(b: Branching) -> bool:
    heads = [h for _, h in b.arcs]
    if len(heads) != len(set(heads)) or b.root in heads:
        return False
    ch = b.children()
    seen = {b.root}
    stack = [b.root]
    while stack:
        a = stack.pop()
        for c in ch.get(a, []):
            if c in seen:
                return False
            seen.add(c)
            stack.append(c)
    return seen == b.nodes


def certify(preflow: Preflow, budget: Fraction, wbs: WeightedBranchingSet,
            profile: dict[int, Fraction] | None = None) -> None:
    """Raise :class:`DecompositionError` naming the first violated invariant."""
    if profile is None:
        profile = connectivity_profile(preflow)
    support = preflow.support()
    for b, mu in wbs.items:
        if b.root != preflow.root or not is_branching(b):
            raise DecompositionError(f"not an r-branching: {sorted(b.arcs)}")
        if mu <= 0:
            raise DecompositionError("nonpositive branching weight")
    if wbs.total() != budget:
        raise DecompositionError(f"weights sum to {wbs.total()} instead of K={budget}")
    for e, load in wbs.arc_load().items():
        if load > support.get(e, 0):
            raise DecompositionError(f"arc {e} carries {load} > f_e={support.get(e, 0)}")
    cov = wbs.coverage()
    for v, lam in profile.items():
        if cov.get(v, 0) < min(budget, lam):
            raise DecompositionError(
                f"node {v} covered {cov.get(v, 0)} < min(K, lambda_v)={min(budget, lam)}")
    limit = len(support) + len(preflow.nodes) + 1
    if len(wbs.items) > limit:
        raise DecompositionError(f"{len(wbs.items)} branchings exceeds bound {limit}")


def _best_branching(nodes, arcs, prize, weight, exact):
    """Most profitable branching: ``max prize(S) - min arborescence cost on S``."""
    n = len(nodes)
    if exact:
        w = [[None] * n for _ in range(n)]
        for (a, b), val in weight.items():
            w[a][b] = val
        best, leaf, parent = kernels.subset_arborescence(w, exact=True)
        value, mask = None, 0
        for m_, cost in enumerate(best):
            if cost is None:
                continue
            gain = sum((prize[j + 1] for j in range(n - 1) if (m_ >> j) & 1), Fraction(0)) - cost
            if value is None or gain > value:
                value, mask = gain, m_
    else:
        w = np.full((n, n), np.inf)
        for (a, b), val in weight.items():
            w[a, b] = float(val)
        best, leaf, parent = kernels.subset_arborescence(w)
        masks = np.arange(len(best))
        pz = np.array([float(prize[j + 1]) for j in range(n - 1)])
        gain = np.zeros(len(best))
        for j in range(n - 1):
            gain += ((masks >> j) & 1) * pz[j]
        gain -= best
        mask = int(np.argmax(gain))
    tree = []
    while mask:
        v = int(leaf[mask])
        tree.append((int(parent[mask]), v))
        mask ^= 1 << (v - 1)
    return tree


def decompose_preflow(preflow: Preflow, budget, *, check_preflow: bool = True,
                      profile: dict[int, Fraction] | None = None) -> WeightedBranchingSet:
    """Certified weighted branching decomposition (exact arithmetic).

    With ``check_preflow=False`` the input may be any nonnegative arc vector;
    a :class:`DecompositionError` then signals that no decomposition exists.
    """
    budget = Fraction(budget)
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if check_preflow and not preflow.is_preflow():
        raise DecompositionError("input is not a preflow")
    support = preflow.support()
    if profile is None:
        profile = connectivity_profile(preflow)
    root = preflow.root
    nodes = [root] + [v for v in preflow.nodes if v != root]
    if len(nodes) > MAX_SUPPORT_NODES:
        raise DecompositionError(f"support has {len(nodes)} nodes (> {MAX_SUPPORT_NODES})")
    pos = {v: i for i, v in enumerate(nodes)}
    arcs = sorted(support)
    demand = {v: min(budget, lam) for v, lam in profile.items()}
    cov_nodes = [v for v in nodes[1:] if demand.get(v, 0) > 0]

    if budget == 0:
        wbs = WeightedBranchingSet(root, budget, [])
        certify(preflow, budget, wbs, profile)
        return wbs

    n_arc, n_cov = len(arcs), len(cov_nodes)
    m = 1 + n_arc + n_cov
    arc_row = {e: 1 + i for i, e in enumerate(arcs)}
    cov_row = {v: 1 + n_arc + i for i, v in enumerate(cov_nodes)}
    # columns: empty branching, arc slacks, coverage surplus, coverage artificials
    cols, costs, basis = [], [], []
    branch_of: dict[int, Branching] = {}

    def unit(row, sign=1):
        col = [Fraction(0)] * m
        col[row] = Fraction(sign)
        return col

    cols.append(unit(0))
    costs.append(0)
    branch_of[0] = Branching(root, frozenset())
    basis.append(0)
    for e in arcs:
        cols.append(unit(arc_row[e]))
        costs.append(0)
        basis.append(len(cols) - 1)
    for v in cov_nodes:
        cols.append(unit(cov_row[v], -1))
        costs.append(0)
    for v in cov_nodes:
        cols.append(unit(cov_row[v]))
        costs.append(1)
        basis.append(len(cols) - 1)
    b = [budget] + [support[e] for e in arcs] + [demand[v] for v in cov_nodes]
    # basis rows must line up: row 0 <- empty, arc rows <- slacks, cov rows <- artificials
    lp = RevisedSimplex(np.array(cols, dtype=object).T, b, costs, basis, exact=True)
    seen: set[frozenset] = {frozenset()}

    for _ in range(MAX_COLUMNS):
        lp.solve()
        if lp.objective() == 0:
            break
        y = lp.duals()
        prize = [Fraction(0)] * len(nodes)
        for v in cov_nodes:
            prize[pos[v]] = y[cov_row[v]]
        weight = {(pos[a], pos[bb]): -y[arc_row[(a, bb)]] for a, bb in arcs}
        column = None
        for exact in (False, True):
            tree = _best_branching(nodes, arcs, prize, weight, exact)
            arcset = frozenset((nodes[a], nodes[bb]) for a, bb in tree)
            reduced = -y[0] - sum((y[arc_row[e]] for e in arcset), Fraction(0)) - sum(
                (y[cov_row[v]] for _, v in arcset if v in cov_row), Fraction(0))
            if reduced < 0 and arcset not in seen:
                column = arcset
                break
        if column is None:
            raise DecompositionError(
                f"no improving branching but phase-1 infeasibility {lp.objective()} remains")
        seen.add(column)
        col = [Fraction(0)] * m
        col[0] = Fraction(1)
        for e in column:
            col[arc_row[e]] = Fraction(1)
            if e[1] in cov_row:
                col[cov_row[e[1]]] = Fraction(1)
        j = lp.add_column(col, 0)
        branch_of[j] = Branching(root, column)
    else:
        raise DecompositionError(f"column generation exceeded {MAX_COLUMNS} columns")

    x = lp.x()
    items = [(branch_of[j], x[j]) for j in sorted(branch_of) if x[j] > 0]
    wbs = WeightedBranchingSet(root, budget, items)
    certify(preflow, budget, wbs, profile)
    return wbs
