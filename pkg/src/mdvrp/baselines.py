"""Classical comparison algorithms: tree splitting and tour splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .forest import Tree, min_rooted_forest, shortcut_order
from .instance import Instance, Solution, Tour, make_tour, radial_lb
from .partition import partition_path
from .pruning import cheapest_link, group_subtrees


class BaselineError(AssertionError):
    pass


@dataclass
class TreeSplitResult:
    solution: Solution
    forest_cost: float
    lb: float
    split_sizes: list[int] = field(default_factory=list)

    @property
    def bound(self) -> float:
        return 2 * self.forest_cost + 2 * self.lb


def _split_tree(inst: Instance, tree: Tree, tours: list[Tour], sizes: list[int]) -> None:
    k = inst.k
    parent = dict(tree.parent)
    while True:
        t = Tree(tree.root, parent)
        ch = t.children()
        depth = {t.root: 0}
        order = [t.root]
        for x in order:
            for c in ch[x]:
                depth[c] = depth[x] + 1
                order.append(c)
        count = {x: int(not inst.is_depot(x)) for x in order}
        for x in reversed(order):
            if x != t.root:
                count[parent[x]] += count[x]
        if count[t.root] <= k:
            break
        u = min((x for x in order if count[x] > k), key=lambda x: (-depth[x], x))
        heads = ch[u]
        parts = group_subtrees([count[h] for h in heads], k)
        emitted = False
        for part in parts:
            if sum(count[heads[i]] for i in part) * 2 < k:
                continue
            nodes = [x for i in part for x in t.subtree(heads[i], ch)]
            edges = [(parent[x], x) for x in nodes]
            clients = [x for x in nodes if not inst.is_depot(x)]
            w, r = cheapest_link(inst, clients)
            tours.append(make_tour(inst, r, shortcut_order(edges, w, clients)))
            sizes.append(len(clients))
            for x in nodes:
                del parent[x]
            emitted = True
        if not emitted:
            raise BaselineError("no group with at least k/2 clients below the deepest heavy node")
    rest = [x for x in parent]
    if rest:
        order = shortcut_order([(p, x) for x, p in parent.items()], tree.root, rest)
        tours.append(make_tour(inst, tree.root, order))


def hkm_tree_splitting(inst: Instance, *, check: bool = True) -> TreeSplitResult:
    """Split a cheapest depot-rooted spanning forest into capacity-feasible tours.

    Split-off groups connect through their cheapest client-depot edge (the
    derandomised connection); each tree's final remainder is toured from its
    own depot.
    """
    forest = min_rooted_forest(inst, inst.depot_indices, inst.client_indices)
    tours: list[Tour] = []
    sizes: list[int] = []
    for tree in forest.trees:
        _split_tree(inst, tree, tours, sizes)
    result = TreeSplitResult(Solution(tuple(tours)), forest.cost, radial_lb(inst), sizes)
    if check:
        if any(2 * s < inst.k for s in sizes):
            raise BaselineError("a split-off group has fewer than k/2 clients")
        if result.solution.cost > result.bound + 1e-6 * inst.scale():
            raise BaselineError(
                f"tree splitting cost {result.solution.cost} exceeds 2c(F) + 2lb = {result.bound}")
    return result


def contracted_metric(inst: Instance) -> np.ndarray:
    """Distances on ``{v_R} + C`` after merging all depots into node 0."""
    dd = inst.depot_distance()
    cl = list(inst.client_indices)
    n = len(cl)
    d = np.zeros((n + 1, n + 1))
    sub = inst.cost[np.ix_(cl, cl)]
    via = dd[cl][:, None] + dd[cl][None, :]
    d[1:, 1:] = np.minimum(sub, via)
    np.fill_diagonal(d, 0.0)
    d[0, 1:] = dd[cl]
    d[1:, 0] = dd[cl]
    return d


def double_tree_tour(dist: np.ndarray) -> list[int]:
    """Preorder of a Prim MST from node 0: a closed tour within twice the MST cost."""
    n = len(dist)
    in_tree = [False] * n
    best = [math.inf] * n
    link = [-1] * n
    best[0] = 0.0
    children: dict[int, list[int]] = {i: [] for i in range(n)}
    for _ in range(n):
        x = min((i for i in range(n) if not in_tree[i]), key=lambda i: (best[i], i))
        in_tree[x] = True
        if link[x] >= 0:
            children[link[x]].append(x)
        for y in range(n):
            if not in_tree[y] and dist[x, y] < best[y]:
                best[y] = dist[x, y]
                link[y] = x
    order, stack = [], [0]
    while stack:
        x = stack.pop()
        order.append(x)
        stack.extend(sorted(children[x], reverse=True))
    return order


@dataclass
class TourSplitResult:
    solution: Solution
    paths: list[list[int]]
    paths_cost: float
    tsp_cost: float
    lb: float

    @property
    def bound(self) -> float:
        return 2 * self.paths_cost + self.lb


def lift_tour(inst: Instance, order: list[int]) -> list[list[int]]:
    """Depot-rooted paths from a tour of the contracted metric (``order[0]`` is ``v_R``).

    A step between consecutive clients that is cheaper through the depots
    ends the current path; the next client opens a path at its nearest depot.
    """
    cl = list(inst.client_indices)
    dd = inst.depot_distance()
    seq = [cl[i - 1] for i in order[1:]]
    paths: list[list[int]] = []
    for v in seq:
        if paths:
            a = paths[-1][-1]
            if inst.cost[a, v] <= dd[a] + dd[v]:
                paths[-1].append(v)
                continue
        paths.append([inst.nearest_depot(v), v])
    return paths


def lsl_tour_splitting(inst: Instance, *, tsp: Callable[[np.ndarray], list[int]] = double_tree_tour,
                       check: bool = True) -> TourSplitResult:
    """Tour splitting in the depot-contracted metric with a pluggable TSP routine."""
    dist = contracted_metric(inst)
    order = tsp(dist)
    if sorted(order) != list(range(len(dist))) or order[0] != 0:
        raise ValueError("TSP routine must return a permutation starting at node 0")
    tsp_cost = math.fsum(dist[order[i], order[(i + 1) % len(order)]] for i in range(len(order)))
    paths = lift_tour(inst, order)
    paths_cost = math.fsum(inst.cost[a, b] for p in paths for a, b in zip(p, p[1:]))
    tours: list[Tour] = []
    for p in paths:
        tours.extend(partition_path(inst, p, [], check=check).tours)
    result = TourSplitResult(Solution(tuple(tours)), paths, paths_cost, tsp_cost, radial_lb(inst))
    if check:
        tol = 1e-6 * inst.scale()
        if paths_cost > tsp_cost + tol:
            raise BaselineError(f"lifted paths cost {paths_cost} exceed the tour cost {tsp_cost}")
        if result.solution.cost > result.bound + tol:
            raise BaselineError(
                f"tour splitting cost {result.solution.cost} exceeds 2c(paths) + lb = {result.bound}")
    return result
