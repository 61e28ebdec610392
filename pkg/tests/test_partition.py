from __future__ import annotations

import itertools
import math
import random

import pytest

from mdvrp.forest import Tree, min_rooted_forest
from mdvrp.instance import Instance, ell, generate_random, path_cost
from mdvrp.partition import (SHORT, TALL, averaged_tree_charge, build_line, classify_tree,
                             covered_nodes, dfs_order, partition_path, split_with_offset,
                             steiner_edges, subsequence_to_tour, trunk)
from mdvrp.pruning import prune_tree

from conftest import line_instance, random_tree


def coords_instance(points, k):
    return Instance.from_coords(["d0"], [f"c{i}" for i in range(len(points) - 1)], k,
                                points[:1], points[1:])


def test_dfs_single_branch():
    inst = line_instance([0], [1, 2, 3], 4)
    tree = Tree(1, {2: 1, 3: 2})
    assert dfs_order(inst, tree, {2, 3}) == [3, 2]


def test_dfs_trunk_first():
    inst = coords_instance([(0, 0), (0, 1), (1, 1), (0, 6)], 4)
    tree = Tree(1, {2: 1, 3: 1})          # c(1,3) = 5 is the trunk, c(1,2) = 1
    assert dfs_order(inst, tree, {2, 3}) == [3, 2]


def brute_trunk(inst, tree):
    ch = tree.children()
    best = None
    for leaf in (x for x in tree.nodes if not ch[x]):
        route = [leaf]
        while route[-1] != tree.root:
            route.append(tree.parent[route[-1]])
        cost = path_cost(inst, route)
        if best is None or cost > best[1] + 1e-12 or (abs(cost - best[1]) <= 1e-12 and leaf < best[0][0]):
            best = (route, cost)
    return best[0][::-1], best[1]


def _random_tree(seed):
    rng = random.Random(seed)
    k = rng.randint(3, 9)
    inst = generate_random(seed, rng.randint(2, 12), rng.randint(1, 2), k)
    return rng, inst, random_tree(inst, rng)


@pytest.mark.parametrize("seed", range(200))
def test_dfs_descends_trunk_first(seed):
    rng, inst, tree = _random_tree(seed)
    order = dfs_order(inst, tree, set(tree.parent))
    tr, _ = trunk(inst, tree)
    assert order[0] == tr[-1]
    assert sorted(order) == sorted(tree.parent)
    pos = {v: i for i, v in enumerate(order)}
    for v, p in tree.parent.items():                # post-order: children before parents
        if p != tree.root:
            assert pos[v] < pos[p]


def test_single_edge_classification():
    for dist in (0.01, 0.5, 3.0):
        inst = coords_instance([(0, 0), (10, 0), (10, dist)], 4)
        tree = Tree(1, {2: 1})
        c, lv, k = dist, inst.radial()[2], 4
        assert classify_tree(inst, tree, {2}, "definition") == (TALL if c / 2 > lv / 4 / k else SHORT)
        assert classify_tree(inst, tree, {2}, "proof") == (TALL if c / 2 > lv * k / 4 else SHORT)


@pytest.mark.parametrize("deg", [2, 3, 5])
def test_equal_star_is_short(deg):
    import numpy as np
    pts = [(0, 0), (5, 5)] + [(5 + math.cos(2 * math.pi * i / deg), 5 + math.sin(2 * math.pi * i / deg))
                              for i in range(deg)]
    inst = coords_instance(pts, 6)
    tree = Tree(1, {v: 1 for v in range(2, 2 + deg)})
    for rule in ("proof", "definition"):
        assert classify_tree(inst, tree, set(tree.parent), rule) == SHORT


@pytest.mark.parametrize("seed", range(100))
def test_classification_matches_enumerated_trunk(seed):
    rng, inst, tree = _random_tree(seed)
    st = prune_tree(inst, tree)
    pruned = st.tree
    if not st.uncovered or not pruned.parent:
        return
    tr, t = brute_trunk(inst, pruned)
    assert (tr, pytest.approx(t)) == trunk(inst, pruned)
    c = pruned.edge_cost(inst)
    share = ell(inst, st.uncovered)
    p = len(st.uncovered) / inst.k
    assert classify_tree(inst, pruned, st.uncovered, "proof") == (SHORT if t <= c / 2 + share / (4 * p) else TALL)
    assert classify_tree(inst, pruned, st.uncovered, "definition") == (SHORT if t <= c / 2 + share / 4 * p else TALL)


def test_split_without_trees():
    k = 4
    inst = line_instance([0], list(range(1, 2 * k + 1)), k)
    line = build_line(inst, list(range(2 * k + 1)), [])
    subs = split_with_offset(line, 1, k)
    assert [[p + 1 for p in s.positions] for s in subs] == [[1, 2, 3, 4], [5, 6, 7, 8], [9]]
    assert [s.connector + 1 for s in subs] == [1, 5, 9]


def figure_layout():
    """Path of 24 clients; a tall chain at v_14 and a short star at v_19; a' = 36."""
    pts = [(0, 0)] + [(x, 0) for x in range(1, 25)]
    pts += [(14, 6 * i) for i in range(1, 6)]
    pts += [(19 + dx, dy) for dx, dy in [(0.5, 0.5), (-0.5, 0.5), (0.5, 1), (-0.5, 1), (0.3, 1.5), (-0.3, 1.5)]]
    inst = coords_instance(pts, 12)
    chain = Tree(14, {25: 14, 26: 25, 27: 26, 28: 27, 29: 28})
    star = Tree(19, {v: 19 for v in range(30, 36)})
    trees = [(chain, frozenset(range(25, 30))), (star, frozenset(range(30, 36)))]
    return inst, list(range(25)), trees


def test_figure_split_positions():
    inst, path, trees = figure_layout()
    line = build_line(inst, path, trees)
    assert len(line.seq) == 36 and [t.kind for t in line.trees] == [TALL, SHORT]
    subs = split_with_offset(line, 6, 12)
    assert {s.connector + 1 for s in subs} == {1, 6, 18, 30}
    holding = [s for s in subs if 17 in s.positions]
    assert len(holding) == 2 and sum(s.connector_only for s in holding) == 1
    cut = next(s for s in subs if s.connector_only)
    assert cut.positions[0] == line.base_pos[0] + 1


def test_figure_double_usage():
    inst, path, trees = figure_layout()
    line = build_line(inst, path, trees)
    usage = {}
    for sub in split_with_offset(line, 6, 12):
        for e in steiner_edges(line, [line.seq[p] for p in sub.positions]):
            usage[e] = usage.get(e, 0) + 1
    path_edges = set(zip(path, path[1:]))
    assert all(usage.get(e, 0) <= 1 for e in path_edges)
    split_nodes = {line.seq[p] for p in (5, 17, 29)}
    for tree, _ in trees:
        double = {e for e in tree.edges() if usage.get(e, 0) == 2}
        inside = [v for v in tree.parent if v in split_nodes]
        assert len(inside) <= 1
        if double:
            route = set()
            x = inside[0]
            while x != tree.root:
                route.add((tree.parent[x], x))
                x = tree.parent[x]
            assert double <= route
    partition_path(inst, path, trees)         # full structural check, all offsets


def test_path_block_tour_bound():
    inst = line_instance([0], [1, 3, 4, 7, 8], 3)
    line = build_line(inst, [0, 1, 2, 3, 4, 5], [])
    subs = split_with_offset(line, 2, 3)
    assert subsequence_to_tour(inst, line, subs[0]) is None      # depot-only block
    for sub in subs[1:]:
        tour, edges, link = subsequence_to_tour(inst, line, sub)
        nodes = [line.seq[p] for p in sub.positions]
        assert tour.cost <= 2 * path_cost(inst, nodes) + 2 * inst.depot_distance()[nodes[0]] + 1e-12
    first = split_with_offset(line, 1, 3)[0]
    assert subsequence_to_tour(inst, line, first)[2] == 0.0


def _random_config(seed, rule="proof"):
    rng = random.Random(seed)
    k = rng.randint(3, 8)
    n = rng.randint(2, 30)
    m = rng.randint(1, 3)
    inst = generate_random(seed, n, m, k, rng.choice(["euclidean-uniform", "euclidean-clustered"]))
    cl = list(inst.client_indices)
    rng.shuffle(cl)
    cut = rng.randint(1, n)
    on_path, U = cl[:cut], cl[cut:]
    path = [rng.randrange(m)] + on_path
    forest = min_rooted_forest(inst, list(inst.depot_indices) + on_path, U)
    trees = []
    for t in forest.trees:
        st = prune_tree(inst, t)
        if t.root in path[1:] and st.uncovered:
            trees.append((st.tree, frozenset(st.uncovered)))
    return inst, path, trees


@pytest.mark.parametrize("seed", range(150))
@pytest.mark.parametrize("rule", ["proof", "definition"])
def test_random_partitions(seed, rule):
    inst, path, trees = _random_config(seed)
    res = partition_path(inst, path, trees, rule=rule)
    k = inst.k
    expected = set(path[1:]) | {v for _, u in trees for v in u}
    covered = [inst.node(c) for t in res.tours for c in t.clients]
    assert sorted(covered) == sorted(expected)
    assert all(len(t.clients) <= k for t in res.tours)
    assert res.best.cost <= res.bound + 1e-6 * inst.scale()
    for o in res.offsets:
        assert res.best.cost <= o.cost
    if rule == "proof":
        for i, info in enumerate(res.line.trees):
            p = len(info.uncovered) / k
            assert averaged_tree_charge(res, i) <= (2 + p) * info.cost + 1.5 * info.share + 1e-9
    for o in res.offsets:
        for sub in split_with_offset(res.line, o.tau, k):
            built = subsequence_to_tour(inst, res.line, sub)
            if built is None:
                continue
            tour, edges, link = built
            cost_e = sum(inst.cost[a, b] for a, b in edges)
            assert tour.cost <= 2 * cost_e + 2 * link + 1e-9
            assert sorted(inst.node(c) for c in tour.clients) == sorted(covered_nodes(res.line, sub))


def best_offset_by_hand(inst, path):
    """Tour splitting of a bare path: blocks of k from offset tau, each toured in order."""
    k = inst.k
    seq = path
    best = math.inf
    for tau in range(1, k + 1):
        total, b = 0.0, -1
        while True:
            lo, hi = max(b * k + tau - 1, 0), min(b * k + tau - 1 + k - 1, len(seq) - 1)
            if lo > len(seq) - 1:
                break
            block = [v for v in seq[lo:hi + 1] if not inst.is_depot(v)]
            if block:
                dep = seq[0] if lo == 0 else inst.nearest_depot(seq[lo])
                total += path_cost(inst, [dep, *block, dep])
            b += 1
        best = min(best, total)
    return best


@pytest.mark.parametrize("seed", range(40))
def test_bare_path_matches_hand_split(seed):
    rng = random.Random(seed)
    inst = generate_random(seed, rng.randint(1, 20), rng.randint(1, 3), rng.randint(3, 7))
    path = [rng.randrange(inst.m)] + rng.sample(list(inst.client_indices), inst.n)
    res = partition_path(inst, path, [])
    assert math.isclose(res.best.cost, best_offset_by_hand(inst, path), rel_tol=1e-12)
    assert res.best.cost <= 2 * path_cost(inst, path) + ell(inst, path[1:]) + 1e-9


def test_exactly_k_path():
    inst = line_instance([0], [1, 2, 3], 3)
    res = partition_path(inst, [0, 1, 2, 3], [])
    assert res.bound == pytest.approx(2 * 3 + ell(inst, [1, 2, 3]))
    assert res.best.cost == 6.0 and len(res.tours) == 1
