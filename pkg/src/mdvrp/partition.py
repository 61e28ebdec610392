"""Tour forming: merge a path with its residual trees and split by offset.

The trees hanging from a path are spliced into the path's node order by a
post-order DFS that descends the trunk (the costliest root-to-leaf path)
first.  The merged sequence is cut every ``k`` positions starting at offset
``tau``; a block whose successor split node sits in a tall tree is cut once
more at that tree's base so the tree's doubled edges stay off the trunk.
Every offset ``tau in 1..k`` is tried and the cheapest tour set kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .forest import Tree, shortcut_order
from .instance import Instance, Tour, make_tour
from .pruning import BETA, EDGE_FACTOR

SHORT, TALL = "short", "tall"
RULES = ("proof", "definition")


class PartitionError(AssertionError):
    """A guaranteed property of the split failed; the message names it."""


def trunk(inst: Instance, tree: Tree) -> tuple[list[int], float]:
    """Costliest root-to-leaf path (smallest leaf index on ties) and its cost."""
    ch = tree.children()
    dist = {tree.root: 0.0}
    order = [tree.root]
    for x in order:
        for c in ch[x]:
            dist[c] = dist[x] + inst.cost[x, c]
            order.append(c)
    leaves = [x for x in order if not ch[x]]
    leaf = min(leaves, key=lambda x: (-dist[x], x))
    path = [leaf]
    while path[-1] != tree.root:
        path.append(tree.parent[path[-1]])
    return path[::-1], dist[leaf]


def classify_tree(inst: Instance, tree: Tree, uncovered, rule: str = "proof") -> str:
    """Short or tall, from the trunk cost against half the tree plus a radial term.

    With ``p = |U|/k`` and ``l = ell(U)`` the threshold is ``c/2 + l/(4p)``
    under ``rule="proof"`` and ``c/2 + (l/4) p`` under ``rule="definition"``.
    Only the first keeps the averaged per-tree charge below
    ``(2 + p) c + 1.5 l`` for tall trees.
    """
    uncovered = set(uncovered)
    if not uncovered:
        raise ValueError("tree has no uncovered client")
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    _, t = trunk(inst, tree)
    c = tree.edge_cost(inst)
    share = math.fsum(inst.radial()[v] for v in uncovered)
    p = len(uncovered) / inst.k
    extra = share / (4 * p) if rule == "proof" else share / 4 * p
    return SHORT if t <= c / 2 + extra else TALL


def dfs_order(inst: Instance, tree: Tree, uncovered) -> list[int]:
    """Post-order of the uncovered nodes; the trunk child is always entered first."""
    uncovered = set(uncovered)
    if not tree.parent:
        return []
    ch = tree.children()
    on_trunk = set(trunk(inst, tree)[0])
    out: list[int] = []
    stack: list[tuple[int, bool]] = [(tree.root, False)]
    while stack:
        x, done = stack.pop()
        if done:
            if x != tree.root and x in uncovered:
                out.append(x)
            continue
        stack.append((x, True))
        kids = sorted(ch[x], key=lambda c: (c not in on_trunk, c))
        stack.extend((c, False) for c in reversed(kids))
    return out


@dataclass
class TreeInfo:
    tree: Tree
    uncovered: frozenset[int]
    kind: str
    trunk: list[int]
    trunk_cost: float
    cost: float
    share: float


@dataclass
class OrderedLine:
    """Path ``v_1..v_a`` (``v_1`` a depot) merged with its trees into ``P'``."""

    path: list[int]
    seq: list[int]
    trees: list[TreeInfo]
    tree_of: dict[int, int]                  # tree client -> index into trees
    base_pos: list[int]                      # per tree, position of its root in seq
    parent: dict[int, int] = field(repr=False)   # combined path+forest tree, rooted at v_1

    @property
    def depot(self) -> int:
        return self.path[0]

    def edge_owner(self, child: int) -> int:
        """-1 for path edges, else the index of the tree holding edge (parent, child)."""
        return self.tree_of.get(child, -1)


def build_line(inst: Instance, path: Sequence[int], trees: Sequence[tuple[Tree, frozenset]],
               rule: str = "proof") -> OrderedLine:
    path = list(path)
    if not path or not inst.is_depot(path[0]):
        raise ValueError("path must start at a depot")
    on_path = set(path)
    parent = {path[i + 1]: path[i] for i in range(len(path) - 1)}
    hanging: dict[int, list[int]] = {}
    infos: list[TreeInfo] = []
    tree_of: dict[int, int] = {}
    for tree, unc in trees:
        if tree.root not in on_path:
            raise ValueError(f"tree root {tree.root} is not on the path")
        unc = frozenset(unc)
        for x, p in tree.parent.items():
            if x in on_path or x in parent:
                raise ValueError(f"node {x} appears twice in the merged tree")
            parent[x] = p
        idx = len(infos)
        for x in tree.parent:
            tree_of[x] = idx
        tr, tcost = trunk(inst, tree) if tree.parent else ([tree.root], 0.0)
        kind = classify_tree(inst, tree, unc, rule) if unc else SHORT
        infos.append(TreeInfo(tree, unc, kind, tr, tcost, tree.edge_cost(inst),
                              math.fsum(inst.radial()[v] for v in unc)))
        hanging.setdefault(tree.root, []).append(idx)
    seq: list[int] = []
    base_pos = [0] * len(infos)
    for v in path:
        seq.append(v)
        for idx in hanging.get(v, []):
            base_pos[idx] = len(seq) - 1
            seq.extend(dfs_order(inst, infos[idx].tree, infos[idx].uncovered))
    return OrderedLine(path, seq, infos, tree_of, base_pos, parent)


@dataclass(frozen=True)
class Subsequence:
    """Positions of ``P'`` (0-based) covered by one tour, and its connector.

    ``connector`` is the position of the split node (or the depot) linking
    the tour to its nearest depot; ``connector_only`` marks a split node
    appended to the suffix of a tall-tree cut, which that tour skips.
    """

    positions: tuple[int, ...]
    connector: int
    connector_only: bool = False


def split_with_offset(line: OrderedLine, tau: int, k: int) -> list[Subsequence]:
    """Cut ``P'`` at ``u_tau, u_{tau+k}, ...`` (1-based) with the tall-tree refinement."""
    n = len(line.seq)
    if not 1 <= tau <= k:
        raise ValueError(f"offset {tau} outside 1..{k}")
    tall_owner = {v: i for v, i in line.tree_of.items()
                  if line.trees[i].kind == TALL and v in line.trees[i].uncovered}
    subs: list[Subsequence] = []
    b = -1
    while True:
        start = b * k + tau - 1
        end = min(start + k - 1, n - 1)
        start = max(start, 0)
        if start > n - 1:
            break
        if start <= end:
            own = 0 if b == -1 else start
            nxt = (b + 1) * k + tau - 1
            idx = tall_owner.get(line.seq[nxt]) if nxt <= n - 1 else None
            if idx is not None:
                j = line.base_pos[idx]
                if not start <= j <= end:
                    raise PartitionError("tall tree base lies outside the block being cut")
                subs.append(Subsequence(tuple(range(start, j + 1)), own))
                subs.append(Subsequence(tuple(range(j + 1, end + 1)) + (nxt,), nxt, True))
            else:
                subs.append(Subsequence(tuple(range(start, end + 1)), own))
        b += 1
    return subs


def steiner_edges(line: OrderedLine, nodes) -> list[tuple[int, int]]:
    """Edges ``(parent, child)`` of the minimal subtree of path+forest spanning ``nodes``."""
    nodes = set(nodes)
    if len(nodes) <= 1:
        return []
    count: dict[int, int] = {}
    for v in nodes:
        x = v
        while True:
            count[x] = count.get(x, 0) + 1
            if x not in line.parent:
                break
            x = line.parent[x]
    total = len(nodes)
    return [(line.parent[x], x) for x, c in count.items() if 0 < c < total and x in line.parent]


def covered_nodes(line: OrderedLine, sub: Subsequence) -> list[int]:
    pos = sub.positions[:-1] if sub.connector_only else sub.positions
    return [line.seq[p] for p in pos if line.seq[p] != line.depot]


def subsequence_to_tour(inst: Instance, line: OrderedLine, sub: Subsequence):
    """Tour over the subsequence, or ``None`` if it covers no client.

    Returns ``(tour, edges, link)``: the doubled minimal subtree ``edges``,
    and ``link`` the connector's depot distance (0 for the path's depot).
    """
    clients = covered_nodes(line, sub)
    if not clients:
        return None
    nodes = [line.seq[p] for p in sub.positions]
    edges = steiner_edges(line, nodes)
    con = line.seq[sub.connector]
    if con == line.depot:
        depot, link = con, 0.0
    else:
        depot = inst.nearest_depot(con)
        link = float(inst.cost[con, depot])
    order = shortcut_order(edges, con, clients)
    return make_tour(inst, depot, order), edges, link


@dataclass
class OffsetResult:
    tau: int
    tours: list[Tour]
    cost: float
    charges: dict[int, float]     # -1: path part; i: tree i (pre-shortcut doubled cost)


def _run_offset(inst: Instance, line: OrderedLine, tau: int, check: bool) -> OffsetResult:
    k = inst.k
    subs = split_with_offset(line, tau, k)
    tours, usage, charges = [], {}, {}
    for sub in subs:
        built = subsequence_to_tour(inst, line, sub)
        if built is None:
            continue
        tour, edges, link = built
        if len(tour.clients) > k:
            raise PartitionError(f"tour over {len(tour.clients)} > k={k} clients")
        tours.append(tour)
        for a, b in edges:
            usage[(a, b)] = usage.get((a, b), 0) + 1
            owner = line.edge_owner(b)
            charges[owner] = charges.get(owner, 0.0) + 2 * inst.cost[a, b]
        con = line.seq[sub.connector]
        owner = line.tree_of.get(con, -1)
        charges[owner] = charges.get(owner, 0.0) + 2 * link
    if check:
        _check_structure(inst, line, tau, subs, usage)
    return OffsetResult(tau, tours, math.fsum(t.cost for t in tours), charges)


def _path_to_root(tree: Tree, v: int) -> list[tuple[int, int]]:
    out = []
    while v != tree.root:
        out.append((tree.parent[v], v))
        v = tree.parent[v]
    return out


def _is_single_path(edges: set[tuple[int, int]]) -> bool:
    if not edges:
        return True
    deg: dict[int, int] = {}
    for a, b in edges:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
    if any(d > 2 for d in deg.values()):
        return False
    ends = sum(1 for d in deg.values() if d == 1)
    # a forest whose vertices have degree <= 2 and exactly two ends is one path
    return ends == 2 and len(deg) == len(edges) + 1


def _check_structure(inst, line: OrderedLine, tau: int, subs, usage) -> None:
    k = inst.k
    n = len(line.seq)
    split_pos = [p for p in range(tau - 1, n, k)]
    splits = {line.seq[p] for p in split_pos}
    for (a, b), used in usage.items():
        owner = line.edge_owner(b)
        if owner == -1 and used > 1:
            raise PartitionError(f"path edge {(a, b)} used by {used} subsequences")
        if used > 2:
            raise PartitionError(f"tree edge {(a, b)} used by {used} subsequences")
    for idx, info in enumerate(line.trees):
        inside = [v for v in info.uncovered if v in splits]
        if len(inside) > 1:
            raise PartitionError(f"tree {idx} holds {len(inside)} split nodes")
        double = {e for e in info.tree.edges() if usage.get(e, 0) == 2}
        if not double:
            continue
        if not inside:
            raise PartitionError(f"tree {idx} has doubly used edges but no split node")
        if not _is_single_path(double):
            raise PartitionError(f"doubly used edges of tree {idx} do not form one path")
        allowed = set(_path_to_root(info.tree, inside[0]))
        if info.kind == TALL:
            tr = info.trunk
            allowed -= set(zip(tr, tr[1:]))
        if not double <= allowed:
            raise PartitionError(
                f"doubly used edges of {info.kind} tree {idx} leave the split node's "
                f"{'path to the trunk' if info.kind == TALL else 'path to the root'}")
    seen: dict[int, int] = {}
    for sub in subs:
        for v in covered_nodes(line, sub):
            seen[v] = seen.get(v, 0) + 1
    expected = {v for v in line.seq if v != line.depot}
    if set(seen) != expected or any(c != 1 for c in seen.values()):
        raise PartitionError("subsequences do not cover each merged client exactly once")


@dataclass
class PartitionResult:
    line: OrderedLine
    best: OffsetResult
    offsets: list[OffsetResult]
    path_cost: float
    forest_cost: float
    path_share: float
    forest_share: float
    beta: float = BETA

    @property
    def bound(self) -> float:
        return (2 * self.path_cost + EDGE_FACTOR * self.forest_cost + self.path_share
                + self.forest_share / self.beta)

    @property
    def tours(self) -> list[Tour]:
        return self.best.tours


def averaged_tree_charge(result: PartitionResult, idx: int) -> float:
    """Mean over all offsets of the doubled edge and link cost attributed to tree ``idx``."""
    return math.fsum(o.charges.get(idx, 0.0) for o in result.offsets) / len(result.offsets)


def partition_path(inst: Instance, path: Sequence[int], trees: Sequence[tuple[Tree, frozenset]],
                   *, rule: str = "proof", beta: float = BETA, check: bool = True,
                   tol: float | None = None) -> PartitionResult:
    """Best-offset tour set for one path and the residual trees rooted on it."""
    k = inst.k
    line = build_line(inst, path, trees, rule)
    if check:
        for i, info in enumerate(line.trees):
            if len(info.uncovered) >= k:
                raise PartitionError(f"tree {i} keeps {len(info.uncovered)} >= k uncovered clients")
    offsets = [_run_offset(inst, line, tau, check) for tau in range(1, k + 1)]
    best = min(offsets, key=lambda o: (o.cost, o.tau))
    rad = inst.radial()
    result = PartitionResult(
        line, best, offsets,
        path_cost=math.fsum(inst.cost[a, b] for a, b in zip(line.path, line.path[1:])),
        forest_cost=math.fsum(t.cost for t in line.trees),
        path_share=math.fsum(rad[v] for v in line.path[1:]),
        forest_share=math.fsum(t.share for t in line.trees),
        beta=beta)
    if check:
        tol = 1e-6 * inst.scale() if tol is None else tol
        if best.cost > result.bound + tol:
            raise PartitionError(
                f"split cost {best.cost} exceeds 2c(P) + 2.5c(F') + l(C_P) + l(U')/beta = {result.bound}")
        path_mean = averaged_tree_charge(result, -1)
        if path_mean > 2 * result.path_cost + result.path_share + tol:
            raise PartitionError(f"averaged path charge {path_mean} exceeds 2c(P) + l(C_P)")
        if rule == "proof":
            for i, info in enumerate(line.trees):
                p = len(info.uncovered) / k
                mean = averaged_tree_charge(result, i)
                if mean > (2 + p) * info.cost + 1.5 * info.share + tol:
                    raise PartitionError(
                        f"averaged charge {mean} of tree {i} exceeds (2 + |U|/k) c + 1.5 l")
    return result
