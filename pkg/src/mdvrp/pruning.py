"""Tree pruning: splice capacity-respecting tours off a forest tree.

Each iteration picks the deepest node ``u`` whose subtree holds more than
``k`` uncovered clients (the root if none does), bundles the child subtrees
of ``u`` into groups that cannot be merged further, and emits a tour for a
group whose cost is paid for by ``2.5`` times its edges plus ``1/beta``
times the radial share of the clients it covers.  Pruning stops once an
iteration covers nothing; the residual tree then carries at most
``beta * k`` uncovered clients and, when it carries more than ``k/2``, their
radial share dominates ``Delta`` times its cost.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .forest import Tree, shortcut_order
from .instance import Instance, Tour, make_tour

log = logging.getLogger(__name__)

BETA = 0.5902302342
DELTA = 1.6353454381
EDGE_FACTOR = 2.5
REL_TOL = 1e-9


class PruningError(AssertionError):
    """A guaranteed property of pruning failed; the message names it."""


def _leq(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + REL_TOL * max(abs(rhs), abs(lhs), 1.0)


def constant_checks(beta=BETA, delta=DELTA) -> dict[str, bool]:
    """The inequalities on ``(beta, Delta)`` that the analysis relies on.

    Evaluated exactly: the decimal constants are converted to ``Fraction``.
    """
    b = Fraction(str(beta))
    d = Fraction(str(delta))
    p1 = (d - (1 - b) * Fraction(3, 2)) / (3 - 2 * b)
    p2 = (2 + 3 * b / d) / (2 + 1 / (1 - b))
    return {
        "2 - 0.5/Delta <= 1/beta": 2 - Fraction(1, 2) / d <= 1 / b,
        "1.5 + (beta - 0.5)/Delta <= 1/beta": Fraction(3, 2) + (b - Fraction(1, 2)) / d <= 1 / b,
        "1/(1 - beta) < 3": 1 / (1 - b) < 3,
        "p-expressions in [0, 1]": 0 <= p1 <= 1 and 0 <= p2 <= 1,
    }


@dataclass(frozen=True)
class Group:
    """Child subtrees of ``u`` bundled together.

    ``edges`` are the subtree edges plus the parent edges to ``u``; ``cost``
    is their total and ``uncovered`` the uncovered clients in the subtrees.
    """

    u: int
    heads: tuple[int, ...]
    nodes: frozenset[int]
    edges: tuple[tuple[int, int], ...]
    cost: float
    uncovered: tuple[int, ...]


def group_subtrees(sizes: Sequence[int], k: int) -> list[list[int]]:
    """Greedy grouping of subtrees with the given uncovered counts.

    Starts from singletons and repeatedly merges the first pair (ascending
    group index) whose combined count fits in ``k``.  Returns lists of
    subtree indices.
    """
    for i, s in enumerate(sizes):
        if s > k:
            raise PruningError(f"subtree {i} has {s} > k={k} uncovered clients")
    groups = [[i] for i in range(len(sizes))]
    load = list(sizes)
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if load[i] + load[j] <= k:
                    groups[i] += groups.pop(j)
                    load[i] += load.pop(j)
                    merged = True
                    break
            if merged:
                break
    return groups


def cheapest_link(inst: Instance, clients) -> tuple[int, int]:
    dist = inst.depot_distance()
    w = min(clients, key=lambda x: (dist[x], x))
    return w, inst.nearest_depot(w)


def tour_of_group(inst: Instance, group: Group) -> Tour:
    """Double the group's edges, attach the cheapest depot link, shortcut to ``U(G)``."""
    if not group.uncovered:
        raise ValueError("group has no uncovered client")
    w, r = cheapest_link(inst, group.uncovered)
    return make_tour(inst, r, shortcut_order(group.edges, w, group.uncovered))


def top_ell(inst: Instance, clients, count: int) -> list[int]:
    """The ``count`` clients with the largest radial share (smaller index first on ties)."""
    rad = inst.radial()
    return sorted(clients, key=lambda v: (-rad[v], v))[:count]


def tour_of_two_groups(inst: Instance, g: Group, other: Group, k: int) -> tuple[Tour, list[int]]:
    """Tour over ``U(g)`` plus the ``k - |U(g)|`` top-share clients ``A`` of ``other``.

    Returns the tour and ``A``; the tour covers exactly ``k`` clients.
    """
    if len(g.uncovered) + len(other.uncovered) <= k:
        raise ValueError("groups can be merged; the two-group tour needs more than k clients")
    A = top_ell(inst, other.uncovered, k - len(g.uncovered))
    visit = [*g.uncovered, *A]
    w, r = cheapest_link(inst, visit)
    edges = g.edges + other.edges
    return make_tour(inst, r, shortcut_order(edges, w, visit)), A


@dataclass
class PruneStep:
    u: int
    kind: str                      # "single" or "pair"
    tour: Tour
    removed_cost: float
    covered: tuple[int, ...]


@dataclass
class PruneState:
    """Working tree with coverage marks, constants and running totals."""

    root: int
    parent: dict[int, int]
    uncovered: set[int]
    k: int
    beta: float = BETA
    delta: float = DELTA
    steps: list[PruneStep] = field(default_factory=list)
    initial_cost: float = 0.0
    initial_ell: float = 0.0

    @property
    def tours(self) -> list[Tour]:
        return [s.tour for s in self.steps]

    @property
    def tree(self) -> Tree:
        return Tree(self.root, dict(self.parent))

    @property
    def removed_cost(self) -> float:
        return math.fsum(s.removed_cost for s in self.steps)

    def covered_ell(self, inst: Instance) -> float:
        rad = inst.radial()
        return math.fsum(rad[v] for s in self.steps for v in s.covered)

    def cost(self, inst: Instance) -> float:
        return self.tree.edge_cost(inst)


def _subtree_data(state: PruneState):
    tree = state.tree
    ch = tree.children()
    depth = {state.root: 0}
    order = [state.root]
    for x in order:
        for c in ch[x]:
            depth[c] = depth[x] + 1
            order.append(c)
    count = {x: 0 for x in order}
    for x in reversed(order):
        count[x] += x in state.uncovered
        if x != state.root:
            count[state.parent[x]] += count[x]
    return tree, ch, depth, count


def _make_groups(inst: Instance, state: PruneState, tree: Tree, ch, u: int,
                 count) -> list[Group]:
    heads = ch[u]
    parts = group_subtrees([count[h] for h in heads], state.k)
    groups = []
    for part in parts:
        members = tuple(heads[i] for i in part)
        nodes: list[int] = []
        for h in members:
            nodes.extend(tree.subtree(h, ch))
        edges = tuple((state.parent[x], x) for x in nodes)
        cost = math.fsum(inst.cost[a, b] for a, b in edges)
        unc = tuple(sorted(x for x in nodes if x in state.uncovered))
        groups.append(Group(u, members, frozenset(nodes), edges, cost, unc))
    return groups


def _check_group_claim(inst: Instance, g: Group, k: int, beta: float, delta: float) -> None:
    """A group whose own tour was declined is small and radially heavy."""
    size = len(g.uncovered)
    if size >= beta * k:
        raise PruningError(
            f"declined group has {size} >= beta*k={beta * k:.4f} uncovered clients")
    if size > k / 2:
        share = math.fsum(inst.radial()[v] for v in g.uncovered)
        if not _leq(delta * g.cost, share):
            raise PruningError(
                f"declined group with {size} > k/2 clients has share {share} < Delta*c(G)="
                f"{delta * g.cost}")


def prune_tree(inst: Instance, tree: Tree, uncovered=None, *, beta: float = BETA,
               delta: float = DELTA, check: bool = True) -> PruneState:
    """Run the pruning loop on one tree.

    ``uncovered`` defaults to every non-root node.  With ``check`` the
    per-iteration group claim, the residual-tree bounds and the cost ledger
    are asserted; a failure raises :class:`PruningError`.
    """
    k = inst.k
    if uncovered is None:
        uncovered = set(tree.parent)
    state = PruneState(tree.root, dict(tree.parent), set(uncovered), k, beta, delta)
    if state.root in state.uncovered:
        raise ValueError("tree root must be covered")
    state.initial_cost = tree.edge_cost(inst)
    rad = inst.radial()
    state.initial_ell = math.fsum(rad[v] for v in state.uncovered)
    inv_beta = 1.0 / beta

    while True:
        tree_now, ch, depth, count = _subtree_data(state)
        heavy = [x for x in depth if count[x] > k]
        u = min(heavy, key=lambda x: (-depth[x], x)) if heavy else state.root
        if not ch[u]:
            break
        groups = _make_groups(inst, state, tree_now, ch, u, count)
        step = None
        for g in groups:
            if not g.uncovered:
                continue
            tour = tour_of_group(inst, g)
            share = math.fsum(rad[v] for v in g.uncovered)
            if _leq(tour.cost, EDGE_FACTOR * g.cost + inv_beta * share):
                if step is None:
                    step = PruneStep(u, "single", tour, g.cost, g.uncovered), g
            elif check:
                _check_group_claim(inst, g, k, beta, delta)
        if step is None:
            order = sorted(range(len(groups)), key=lambda i: (-groups[i].cost, i))
            for i in order:
                gi = groups[i]
                for j in range(len(groups)):
                    if j == i:
                        continue
                    tour, A = tour_of_two_groups(inst, gi, groups[j], k)
                    covered = tuple(sorted((*gi.uncovered, *A)))
                    share = math.fsum(rad[v] for v in covered)
                    if _leq(tour.cost, EDGE_FACTOR * gi.cost + inv_beta * share):
                        step = PruneStep(u, "pair", tour, gi.cost, covered), gi
                        break
                if step is not None:
                    break
        if step is None:
            break
        rec, g = step
        if u in rec.covered:
            raise PruningError("the branching node of an iteration was covered by its tour")
        for x in g.nodes:
            del state.parent[x]
        state.uncovered -= set(g.nodes)
        state.uncovered -= set(rec.covered)
        state.steps.append(rec)
        log.debug("pruned %s tour at node %d covering %d clients", rec.kind, u, len(rec.covered))

    if check:
        check_pruned(inst, state)
    return state


def check_pruned(inst: Instance, state: PruneState) -> None:
    """Residual-tree bounds and the pruning cost ledger."""
    k, beta, delta = state.k, state.beta, state.delta
    size = len(state.uncovered)
    if size > beta * k:
        raise PruningError(f"residual tree keeps {size} > beta*k={beta * k:.4f} uncovered clients")
    cost = state.cost(inst)
    rad = inst.radial()
    share = math.fsum(rad[v] for v in state.uncovered)
    if size > k / 2 and not _leq(delta * cost, share):
        raise PruningError(
            f"residual tree with {size} > k/2 clients has share {share} < Delta*c(T')={delta * cost}")
    tours = math.fsum(t.cost for t in state.tours)
    bound = EDGE_FACTOR * (state.initial_cost - cost) + (1.0 / beta) * (
        state.initial_ell - share)
    if not _leq(tours, bound + 1e-9 * inst.scale()):
        raise PruningError(f"pruning tours cost {tours} exceeds ledger bound {bound}")
    for t in state.tours:
        if len(t.clients) > k:
            raise PruningError(f"pruning tour exceeds capacity: {len(t.clients)} clients")
