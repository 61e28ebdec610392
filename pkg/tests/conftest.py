from __future__ import annotations

import itertools
import math
import sys

import numpy as np
import pytest

from mdvrp.instance import Instance, generate_random


def line_instance(depot_pos, client_pos, k) -> Instance:
    """Points on the x-axis; depots ``d0..``, clients ``c0..``."""
    return Instance.from_coords(
        [f"d{i}" for i in range(len(depot_pos))], [f"c{i}" for i in range(len(client_pos))], k,
        [(x, 0.0) for x in depot_pos], [(x, 0.0) for x in client_pos])


def partitions(items):
    """All set partitions of a list (oracle helper)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first, *part[i]]] + part[i + 1:]
        yield [[first], *part]


def best_tour_by_permutation(inst: Instance, group) -> float:
    best = math.inf
    for r in inst.depot_indices:
        for perm in itertools.permutations(group):
            nodes = [r, *perm, r]
            best = min(best, sum(inst.cost[a, b] for a, b in zip(nodes, nodes[1:])))
    return best


def opt_by_partition(inst: Instance) -> float:
    best = math.inf
    cache = {}
    for part in partitions(list(inst.client_indices)):
        if any(len(g) > inst.k for g in part):
            continue
        total = 0.0
        for g in part:
            key = tuple(sorted(g))
            if key not in cache:
                cache[key] = best_tour_by_permutation(inst, key)
            total += cache[key]
        best = min(best, total)
    return best


@pytest.fixture
def small_instances():
    out = []
    for seed in range(6):
        out.append(generate_random(seed, 6, 2, 3, "euclidean-uniform"))
    return out


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_tree(inst: Instance, rng, root: int | None = None, nodes=None):
    """Uniform random recursive tree over ``nodes`` (default: all clients)."""
    from mdvrp.forest import Tree
    nodes = list(inst.client_indices if nodes is None else nodes)
    rng.shuffle(nodes)
    if root is None:
        root, nodes = nodes[0], nodes[1:]
    order = [root]
    parent = {}
    for v in nodes:
        parent[v] = order[rng.randrange(len(order))]
        order.append(v)
    return Tree(root, parent)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion that ran."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
