"""Rooted trees and the cheapest forest grafting uncovered clients onto roots."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .instance import Instance

SUPER = -1


@dataclass
class Tree:
    """A tree hanging from ``root``; ``parent`` covers every other node."""

    root: int
    parent: dict[int, int] = field(default_factory=dict)

    @property
    def nodes(self) -> list[int]:
        return [self.root, *self.parent]

    def children(self) -> dict[int, list[int]]:
        ch: dict[int, list[int]] = {v: [] for v in self.nodes}
        for v, p in self.parent.items():
            ch[p].append(v)
        for kids in ch.values():
            kids.sort()
        return ch

    def depth(self) -> dict[int, int]:
        ch = self.children()
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            x = stack.pop()
            for c in ch[x]:
                depth[c] = depth[x] + 1
                stack.append(c)
        return depth

    def subtree(self, v: int, ch: dict[int, list[int]] | None = None) -> list[int]:
        ch = ch or self.children()
        out, stack = [], [v]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(ch[x])
        return out

    def edge_cost(self, inst: Instance) -> float:
        return math.fsum(inst.cost[v, p] for v, p in self.parent.items())

    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in self.parent.items()]


@dataclass
class RootedForest:
    trees: list[Tree]
    cost: float

    def tree_of(self) -> dict[int, int]:
        """Map every non-root node to the index of its tree."""
        return {v: i for i, t in enumerate(self.trees) for v in t.parent}


class _DSU:
    def __init__(self):
        self.p: dict[int, int] = {}

    def find(self, x):
        self.p.setdefault(x, x)
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.p[max(ra, rb)] = min(ra, rb)
        return True


def min_rooted_forest(inst: Instance, roots: Iterable[int], uncovered: Iterable[int]) -> RootedForest:
    """Cheapest forest whose components each hold exactly one root and span ``uncovered``.

    All roots are contracted into one super node (an uncovered node's edge to
    it costs its distance to the nearest root, smallest root index on ties);
    Kruskal on ``{super} + uncovered`` with ties broken by ``(cost, smaller
    endpoint, larger endpoint)`` makes the result deterministic.
    """
    roots = sorted(set(roots))
    U = sorted(set(uncovered))
    if not roots:
        raise ValueError("at least one root required")
    if set(roots) & set(U):
        raise ValueError("roots and uncovered nodes overlap")
    c = inst.cost
    attach = {}
    edges = []
    for u in U:
        dists = [c[u, r] for r in roots]
        best = min(range(len(roots)), key=lambda i: (dists[i], roots[i]))
        attach[u] = roots[best]
        edges.append((dists[best], SUPER, u))
    for i, u in enumerate(U):
        for w in U[i + 1:]:
            edges.append((c[u, w], u, w))
    edges.sort()
    dsu = _DSU()
    adj: dict[int, list[int]] = {SUPER: [], **{u: [] for u in U}}
    for _, a, b in edges:
        if dsu.union(a, b):
            adj[a].append(b)
            adj[b].append(a)
    trees: dict[int, Tree] = {}
    seen = {SUPER}
    for first in sorted(adj[SUPER]):
        r = attach[first]
        tree = trees.setdefault(r, Tree(r))
        tree.parent[first] = r
        seen.add(first)
        stack = [first]
        while stack:
            x = stack.pop()
            for y in sorted(adj[x]):
                if y not in seen:
                    seen.add(y)
                    tree.parent[y] = x
                    stack.append(y)
    ordered = [trees[r] for r in sorted(trees)]
    return RootedForest(ordered, math.fsum(t.edge_cost(inst) for t in ordered))


def shortcut_order(edges: Iterable[tuple[int, int]], start: int, keep) -> list[int]:
    """Nodes of ``keep`` in first-visit order of a DFS over the tree ``edges`` from ``start``.

    This is the Eulerian walk of the doubled tree, shortcut past repeats and
    past every node outside ``keep``.
    """
    adj: dict[int, list[int]] = {start: []}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    keep = set(keep)
    order, seen, stack = [], {start}, [start]
    while stack:
        x = stack.pop()
        if x in keep:
            order.append(x)
        for y in sorted(adj[x], reverse=True):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    if len(order) != len(keep):
        raise ValueError("tree does not span every node to visit")
    return order
