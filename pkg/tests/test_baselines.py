from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mdvrp.baselines import (contracted_metric, double_tree_tour, hkm_tree_splitting,
                             lsl_tour_splitting)
from mdvrp.certify import check_feasible
from mdvrp.exact import brute_force_opt
from mdvrp.forest import min_rooted_forest
from mdvrp.instance import generate_random, radial_lb

from conftest import line_instance


def test_tree_split_single_tour():
    inst = generate_random(3, 5, 1, 6)
    res = hkm_tree_splitting(inst)
    mst = min_rooted_forest(inst, [0], inst.client_indices).cost
    assert len(res.solution.tours) == 1
    assert res.solution.cost <= 2 * mst + 1e-12


def test_tour_split_single_client():
    inst = line_instance([0, 10], [8], 3)
    sol = lsl_tour_splitting(inst).solution
    assert [(t.root, t.clients, t.cost) for t in sol.tours] == [("d1", ("c0",), 4.0)]


def test_tour_split_one_segment():
    inst = line_instance([0], [1, 1.5, 2, 2.5], 4)
    sol = lsl_tour_splitting(inst).solution
    assert len(sol.tours) == 1 and sol.cost == pytest.approx(5.0)


@pytest.mark.parametrize("seed", range(25))
def test_bounds_against_opt(seed):
    rng = random.Random(seed)
    inst = generate_random(seed, 8, rng.randint(1, 3), rng.randint(1, 5),
                           rng.choice(["euclidean-uniform", "euclidean-clustered"]))
    opt = brute_force_opt(inst).cost
    tree = hkm_tree_splitting(inst)
    tour = lsl_tour_splitting(inst)
    assert check_feasible(inst, tree.solution) == []
    assert check_feasible(inst, tour.solution) == []
    assert tree.solution.cost <= tree.bound + 1e-9
    assert tree.solution.cost <= 4 * opt + 1e-9
    assert tour.solution.cost <= tour.bound + 1e-9
    assert tour.solution.cost <= 5 * opt + 1e-9
    assert all(2 * s >= inst.k for s in tree.split_sizes)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 40), m=st.integers(1, 4), k=st.integers(1, 9))
def test_feasible_and_bounded(seed, n, m, k):
    inst = generate_random(seed, n, m, k)
    for res in (hkm_tree_splitting(inst), lsl_tour_splitting(inst)):
        assert check_feasible(inst, res.solution) == []
        assert res.solution.cost <= res.bound + 1e-9 * inst.scale()
        assert res.solution.cost >= radial_lb(inst) - 1e-9


def test_double_tree_within_twice_mst():
    inst = generate_random(9, 12, 3, 4)
    d = contracted_metric(inst)
    order = double_tree_tour(d)
    assert order[0] == 0 and sorted(order) == list(range(len(d)))
    cost = sum(d[order[i], order[(i + 1) % len(order)]] for i in range(len(order)))
    mst = min_rooted_forest(inst, inst.depot_indices, inst.client_indices).cost
    assert cost <= 2 * mst + 1e-9


def test_pluggable_tsp():
    inst = generate_random(4, 6, 2, 3)
    reverse = lambda d: [0] + list(range(len(d) - 1, 0, -1))
    res = lsl_tour_splitting(inst, tsp=reverse)
    assert check_feasible(inst, res.solution) == []
    with pytest.raises(ValueError):
        lsl_tour_splitting(inst, tsp=lambda d: [1, 0])
