from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from mdvrp.exact import brute_force_opt
from mdvrp.instance import Instance, generate_random, radial_lb
from mdvrp.lp import (build_base_lp, lp_solve, separate_cuts, solve_lp_cutting_plane)
from mdvrp.simplex import solve_lp

from conftest import line_instance


def tableau_min(c, A, b):
    """Naive dense tableau simplex with Bland's rule: min c x, A x <= b (b >= 0), x >= 0."""
    A = np.asarray(A, float)
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = c
    basis = list(range(n, n + m))
    while True:
        enter = next((j for j in range(n + m) if T[m, j] < -1e-12), None)
        if enter is None:
            break
        ratios = [(T[i, -1] / T[i, enter], basis[i], i) for i in range(m) if T[i, enter] > 1e-12]
        if not ratios:
            raise ValueError("unbounded")
        _, _, row = min(ratios)
        T[row] /= T[row, enter]
        for i in range(m + 1):
            if i != row:
                T[i] -= T[i, enter] * T[row]
        basis[row] = enter
    return -T[m, -1]


def test_single_variable():
    res = solve_lp([1.0], A_ub=[[-1.0]], b_ub=[-3.0])
    assert math.isclose(res.x[0], 3.0)


def test_degenerate_redundant_rows_terminate():
    A = [[1, 1], [1, 1], [2, 2], [1, 0], [0, 1]]
    res = solve_lp([-1, -1], A_ub=A, b_ub=[1, 1, 2, 1, 1])
    assert math.isclose(res.objective, -1.0)
    exact = solve_lp([-1, -1], A_ub=A, b_ub=[1, 1, 2, 1, 1], exact=True)
    assert exact.objective == Fraction(-1)


@pytest.mark.parametrize("seed", range(20))
def test_revised_matches_tableau(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 7), rng.integers(2, 7)
    A = rng.integers(0, 6, (m, n)).astype(float)
    A[:, rng.integers(0, n)] += 1
    A[rng.integers(0, m)] += 1
    b = rng.integers(1, 10, m).astype(float)
    c = -rng.integers(0, 5, n).astype(float)
    assert math.isclose(solve_lp(c, A_ub=A, b_ub=b).objective, tableau_min(c, A, b), abs_tol=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_revised_with_equalities(seed):
    rng = np.random.default_rng(100 + seed)
    n = 6
    x0 = rng.random(n)
    A_eq = rng.normal(size=(2, n))
    A_ub = rng.random((3, n))
    c = rng.random(n)
    b_eq, b_ub = A_eq @ x0, A_ub @ x0 + 0.5
    ref = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, method="highs")
    got = solve_lp(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq)
    assert math.isclose(got.objective, ref.fun, abs_tol=1e-8)


def test_one_client_base_lp():
    inst = line_instance([0], [4], 3)
    model = build_base_lp(inst)
    x = lp_solve(model)
    assert math.isclose(model.cost @ x, 8.0)
    assert math.isclose(x[model.block_of[(0, 1)].z_col[1]], 1.0)


def test_constraint_six_eliminates_z():
    inst = line_instance([0], [1, 3], 3)
    model = build_base_lp(inst)
    assert not model.has_z(0, 1, 2)      # c(c1, r) > c(c0, r)
    assert model.has_z(0, 2, 1)


def test_unreduced_variable_count():
    inst = generate_random(0, 4, 2, 3)
    model = build_base_lp(inst)
    assert model.n_x_full == 240
    assert model.n_x < model.n_x_full


def _block_with_three_clients():
    inst = line_instance([0], [1, 1.5, 3], 3)
    model = build_base_lp(inst)
    blk = model.block_of[(0, 3)]
    return model, blk


def _arc(blk, a, b):
    return blk.x_start + blk.arcs.index((blk.nodes.index(a), blk.nodes.index(b)))


def test_direct_flow_no_violation():
    model, blk = _block_with_three_clients()
    x = np.zeros(model.n_cols)
    x[blk.z_col[3]] = 1.0
    x[blk.z_col[1]] = 1.0
    x[_arc(blk, 0, 1)] = 1.0
    x[_arc(blk, 0, 3)] = 2.0
    cuts = [c for c in separate_cuts(model, x) if (c.r, c.v) == (0, 3)]
    assert cuts == []


def test_detached_cycle_violated():
    model, blk = _block_with_three_clients()
    x = np.zeros(model.n_cols)
    x[blk.z_col[3]] = 1.0
    x[blk.z_col[1]] = 0.5
    x[_arc(blk, 0, 3)] = 2.0
    x[_arc(blk, 1, 2)] = 0.5
    x[_arc(blk, 2, 1)] = 0.5
    cuts = [c for c in separate_cuts(model, x) if (c.r, c.v, c.u) == (0, 3, 1)]
    assert len(cuts) == 1 and cuts[0].sink_side == frozenset({1, 2})


def _violations_by_enumeration(model, x, tol=1e-6):
    """Every (r, v, u, S) with x(in(S)) < z[r,v,u] - tol, by subset enumeration."""
    found = set()
    for blk in model.blocks:
        others = blk.nodes[1:]
        inflow = {}
        for j, (a, b) in enumerate(blk.arcs):
            inflow[(blk.nodes[a], blk.nodes[b])] = x[blk.x_start + j]
        for size in range(1, len(others) + 1):
            for S in itertools.combinations(others, size):
                S = set(S)
                cut = sum(val for (a, b), val in inflow.items() if b in S and a not in S)
                for u in S:
                    if cut < x[blk.z_col[u]] - tol:
                        found.add((blk.r, blk.v, u))
    return found


@pytest.mark.parametrize("seed", range(8))
def test_fractional_violations_match_enumeration(seed):
    inst = generate_random(seed, 5, 1 + seed % 2, 3)
    model = build_base_lp(inst)
    rng = np.random.default_rng(seed)
    x = rng.random(model.n_cols) * (rng.random(model.n_cols) < 0.3)
    for blk in model.blocks:                  # keep the monotonicity rows z_u <= z_v
        zv = x[blk.z_col[blk.v]] = 0.1 + rng.random()
        for col in blk.z_col.values():
            x[col] = min(x[col], zv)
    expected = _violations_by_enumeration(model, x, tol=1e-7)
    got = {(c.r, c.v, c.u) for c in separate_cuts(model, x)}
    assert expected and got == expected


@pytest.mark.parametrize("seed", range(6))
def test_converged_solution_has_no_violated_cut(seed):
    inst = generate_random(seed, 5, 2, 3)
    sol = solve_lp_cutting_plane(inst)
    assert _violations_by_enumeration(sol.model, sol.values) == set()


def test_single_client_lp():
    sol = solve_lp_cutting_plane(line_instance([0], [2.5], 3))
    assert math.isclose(sol.objective, 5.0) and sol.delta == 0.0


def test_coincident_clients():
    inst = line_instance([0], [2, 2, 2], 3)
    assert solve_lp_cutting_plane(inst).objective <= 4.0 + 1e-6


@pytest.mark.parametrize("seed", range(8))
def test_lp_bounds(seed):
    inst = generate_random(seed, 6, 2, 3 + seed % 3)
    sol = solve_lp_cutting_plane(inst)
    tol = 1e-6 * inst.scale()
    assert sol.objective <= brute_force_opt(inst).cost + tol
    assert radial_lb(inst) <= (1 - sol.delta) * sol.objective + tol
    assert 0.0 <= sol.delta <= 1.0
    (A_eq, b_eq), (A_ub, b_ub) = sol.model.matrices()
    assert np.allclose(A_eq @ sol.values, b_eq, atol=1e-7)
    assert np.all(A_ub @ sol.values <= b_ub + 1e-7)


def test_scaling():
    inst = generate_random(7, 5, 2, 3)
    a = solve_lp_cutting_plane(inst)
    b = solve_lp_cutting_plane(inst.scaled(3.5))
    assert math.isclose(b.objective, 3.5 * a.objective, rel_tol=1e-7)
    assert math.isclose(a.delta, b.delta, abs_tol=1e-7)


def test_solver_backends_agree():
    inst = generate_random(2, 3, 1, 3)
    warm = solve_lp_cutting_plane(inst)
    cold = solve_lp_cutting_plane(inst, method="revised")
    assert math.isclose(warm.objective, cold.objective, rel_tol=1e-7)


def test_rejects_small_capacity():
    with pytest.raises(ValueError):
        solve_lp_cutting_plane(generate_random(0, 3, 1, 2))
