"""Flow-based LP relaxation for CVRP-MD, solved by cutting planes.

For every depot ``r`` and client ``v`` (the farthest client of a would-be
tour) the model routes ``2 z[r,v,v]`` units of flow from ``r`` to ``v`` in
the bidirected metric graph; ``z[r,v,u]`` is the fraction of ``u`` served
by that tour.  Connectivity rows ``x(in(S)) >= z[r,v,u]`` are exponential
in number and added lazily by a max-flow separation oracle.

Columns that the model forces to zero are never created: ``z[r,v,u]`` with
``c(u,r) > c(v,r)``, arcs touching such ``u`` (zero throughput), arcs into
``r`` or out of ``v``, and arcs through depots other than ``r``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from . import kernels
from .instance import Instance
from .simplex import solve_lp

try:  # HiGHS object shipped inside scipy; keeps its basis between cut rounds
    from scipy.optimize._highspy._core import _Highs
except ImportError:  # pragma: no cover - depends on the scipy build
    _Highs = None

log = logging.getLogger(__name__)

SEPARATION_TOL = 1e-7
SUPPORT_TOL = 1e-9
MAX_ROUNDS = 10_000


class LpError(RuntimeError):
    pass


@dataclass
class PairBlock:
    """Columns of one (depot, far client) flow."""

    r: int
    v: int
    nodes: list[int]               # r first, then eligible clients in index order
    arcs: list[tuple[int, int]]    # local (a, b) pairs into ``nodes``
    x_start: int
    z_col: dict[int, int]          # global client index -> column

    @property
    def x_cols(self) -> range:
        return range(self.x_start, self.x_start + len(self.arcs))


@dataclass
class Cut:
    r: int
    v: int
    u: int
    sink_side: frozenset[int]      # global node indices, contains u, not r


@dataclass
class LpModel:
    inst: Instance
    blocks: list[PairBlock]
    n_cols: int
    cost: np.ndarray
    eq: tuple[list, list, list, list] = field(repr=False)      # rows, cols, vals, rhs
    ub: tuple[list, list, list, list] = field(repr=False)
    cuts: list[Cut] = field(default_factory=list)
    block_of: dict[tuple[int, int], PairBlock] = field(default_factory=dict, repr=False)

    @property
    def n_x_full(self) -> int:
        """x-variable count of the unreduced model: |R| |C| 2 C(|V|, 2)."""
        n_nodes = self.inst.m + self.inst.n
        return self.inst.m * self.inst.n * n_nodes * (n_nodes - 1)

    @property
    def n_x(self) -> int:
        return sum(len(b.arcs) for b in self.blocks)

    def has_z(self, r: int, v: int, u: int) -> bool:
        blk = self.block_of.get((r, v))
        return blk is not None and u in blk.z_col

    def add_cut(self, cut: Cut) -> None:
        """Append ``x(in(S)) >= z[r,v,u]`` as ``-x(in(S)) + z <= 0``."""
        blk = self.block_of[(cut.r, cut.v)]
        rows, cols, vals, rhs = self.ub
        row = len(rhs)
        for j, (a, b) in enumerate(blk.arcs):
            if blk.nodes[b] in cut.sink_side and blk.nodes[a] not in cut.sink_side:
                rows.append(row)
                cols.append(blk.x_start + j)
                vals.append(-1.0)
        rows.append(row)
        cols.append(blk.z_col[cut.u])
        vals.append(1.0)
        rhs.append(0.0)
        self.cuts.append(cut)

    def matrices(self):
        def build(part):
            rows, cols, vals, rhs = part
            if not rhs:
                return None, None
            A = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), self.n_cols))
            return A, np.array(rhs, dtype=float)
        return build(self.eq), build(self.ub)


@dataclass
class LpSolution:
    model: LpModel
    values: np.ndarray
    objective: float
    delta: float
    rounds: int = 0
    seconds: float = 0.0

    def z(self, r: int, v: int, u: int) -> float:
        blk = self.model.block_of.get((r, v))
        if blk is None or u not in blk.z_col:
            return 0.0
        return float(self.values[blk.z_col[u]])

    def flow(self, r: int, v: int) -> dict[tuple[int, int], float]:
        """Arc values of ``x[r,v]`` on global node indices, support only."""
        blk = self.model.block_of[(r, v)]
        out = {}
        for j, (a, b) in enumerate(blk.arcs):
            val = float(self.values[blk.x_start + j])
            if val > SUPPORT_TOL:
                out[(blk.nodes[a], blk.nodes[b])] = val
        return out

    def active_pairs(self, tol: float = SUPPORT_TOL) -> list[tuple[int, int]]:
        return [(b.r, b.v) for b in self.model.blocks if self.values[b.z_col[b.v]] > tol]


def build_base_lp(inst: Instance) -> LpModel:
    """All constraint families except the lazy connectivity cuts."""
    cost = inst.cost
    blocks: list[PairBlock] = []
    obj: list[float] = []
    eq_rows, eq_cols, eq_vals, eq_rhs = [], [], [], []
    ub_rows, ub_cols, ub_vals, ub_rhs = [], [], [], []
    col = 0
    cover: dict[int, list[int]] = {u: [] for u in inst.client_indices}

    def eq_row(entries, rhs=0.0):
        row = len(eq_rhs)
        for c_, v_ in entries:
            eq_rows.append(row)
            eq_cols.append(c_)
            eq_vals.append(v_)
        eq_rhs.append(rhs)

    def ub_row(entries, rhs=0.0):
        row = len(ub_rhs)
        for c_, v_ in entries:
            ub_rows.append(row)
            ub_cols.append(c_)
            ub_vals.append(v_)
        ub_rhs.append(rhs)

    for r in inst.depot_indices:
        for v in inst.client_indices:
            reach = cost[v, r]
            eligible = [u for u in inst.client_indices if cost[u, r] <= reach]
            nodes = [r, *eligible]
            loc_v = nodes.index(v)
            arcs = [(a, b) for a in range(len(nodes)) for b in range(1, len(nodes))
                    if a != b and a != loc_v]
            x_start = col
            col += len(arcs)
            obj.extend(cost[nodes[a], nodes[b]] for a, b in arcs)
            z_col = {}
            for u in eligible:
                z_col[u] = col
                cover[u].append(col)
                col += 1
                obj.append(0.0)
            blk = PairBlock(r, v, nodes, arcs, x_start, z_col)
            blocks.append(blk)

            out_arcs = [[] for _ in nodes]
            in_arcs = [[] for _ in nodes]
            for j, (a, b) in enumerate(arcs):
                out_arcs[a].append(x_start + j)
                in_arcs[b].append(x_start + j)
            zv = z_col[v]
            eq_row([(j, 1.0) for j in out_arcs[0]] + [(zv, -2.0)])
            eq_row([(j, 1.0) for j in in_arcs[loc_v]] + [(zv, -2.0)])
            for loc, u in enumerate(nodes):
                if loc in (0, loc_v):
                    continue
                eq_row([(j, 1.0) for j in out_arcs[loc]] + [(z_col[u], -1.0)])
                eq_row([(j, 1.0) for j in in_arcs[loc]] + [(z_col[u], -1.0)])
                ub_row([(z_col[u], 1.0), (zv, -1.0)])
            ub_row([(z_col[u], 1.0) for u in eligible if u != v] + [(zv, 1.0 - inst.k)])

    for u in inst.client_indices:
        eq_row([(c_, 1.0) for c_ in cover[u]], 1.0)

    model = LpModel(inst, blocks, col, np.array(obj),
                    (eq_rows, eq_cols, eq_vals, eq_rhs),
                    (ub_rows, ub_cols, ub_vals, ub_rhs))
    model.block_of = {(b.r, b.v): b for b in blocks}
    return model


def lp_solve(model: LpModel, method: str = "highs") -> np.ndarray:
    """Basic optimal solution of the current model, solved from scratch.

    ``highs`` runs the HiGHS dual simplex; ``revised`` runs the in-package
    dense revised simplex (small models only).
    """
    (A_eq, b_eq), (A_ub, b_ub) = model.matrices()
    if method == "revised":
        res = solve_lp(model.cost,
                       None if A_ub is None else A_ub.toarray(), b_ub,
                       None if A_eq is None else A_eq.toarray(), b_eq)
        return np.asarray(res.x, dtype=float)
    if method != "highs":
        raise ValueError(f"unknown LP method {method!r}")
    res = linprog(model.cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-9,
                           "dual_feasibility_tolerance": 1e-9})
    if res.status != 0:
        raise LpError(f"LP solve failed (status {res.status}): {res.message}")
    return np.maximum(res.x, 0.0)


class WarmHighs:
    """Incremental HiGHS simplex: cut rows are appended and re-solved from the last basis."""

    def __init__(self, model: LpModel):
        if _Highs is None:
            raise LpError("HiGHS object not available in this scipy build")
        self.model = model
        self.h = h = _Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("solver", "simplex")
        h.setOptionValue("primal_feasibility_tolerance", 1e-9)
        h.setOptionValue("dual_feasibility_tolerance", 1e-9)
        self.inf = h.getInfinity()
        n = model.n_cols
        h.addVars(n, np.zeros(n), np.full(n, self.inf))
        h.changeColsCost(n, np.arange(n, dtype=np.int32), model.cost)
        (A_eq, b_eq), (A_ub, b_ub) = model.matrices()
        self._add(A_eq, b_eq, b_eq)
        self._add(A_ub, np.full(len(b_ub), -self.inf), b_ub)
        self.n_ub = len(b_ub)

    def _add(self, A, lo, hi):
        if A is None or A.shape[0] == 0:
            return
        A = A.tocsr()
        self.h.addRows(A.shape[0], lo, hi, A.nnz, A.indptr[:-1].astype(np.int32),
                       A.indices.astype(np.int32), A.data)

    def sync(self) -> None:
        """Push rows appended to the model since the last call."""
        rows, cols, vals, rhs = self.model.ub
        if len(rhs) == self.n_ub:
            return
        A = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), self.model.n_cols))[self.n_ub:]
        self._add(A, np.full(A.shape[0], -self.inf), np.array(rhs[self.n_ub:]))
        self.n_ub = len(rhs)

    def solve(self) -> np.ndarray:
        self.sync()
        self.h.run()
        status = self.h.modelStatusToString(self.h.getModelStatus())
        if status != "Optimal":
            raise LpError(f"LP solve failed: {status}")
        return np.maximum(np.array(self.h.getSolution().col_value), 0.0)


def min_cut_dense(cap: np.ndarray, s: int, t: int) -> tuple[float, list[int]]:
    """Max-flow value and the minimal sink side (nodes that reach ``t`` in the residual graph)."""
    value, flow = kernels.max_flow(cap, s, t)
    resid = np.asarray(cap) - np.asarray(flow)
    n = len(cap)
    side = {t}
    stack = [t]
    while stack:
        b = stack.pop()
        for a in range(n):
            if a not in side and resid[a, b] > 1e-12:
                side.add(a)
                stack.append(a)
    return float(value), sorted(side)


def separate_cuts(model: LpModel, values: np.ndarray, tol: float = SEPARATION_TOL) -> list[Cut]:
    """Violated connectivity cuts, at most one per (r, v, u)."""
    found = []
    for blk in model.blocks:
        zv = values[blk.z_col[blk.v]]
        if zv <= tol:
            continue
        size = len(blk.nodes)
        cap = np.zeros((size, size))
        for j, (a, b) in enumerate(blk.arcs):
            cap[a, b] = values[blk.x_start + j]
        for loc in range(1, size):
            u = blk.nodes[loc]
            zu = values[blk.z_col[u]]
            if zu <= tol:
                continue
            value, side = min_cut_dense(cap, 0, loc)
            if value < zu - tol:
                found.append(Cut(blk.r, blk.v, u, frozenset(blk.nodes[i] for i in side)))
    return found


def compute_delta(model: LpModel, values: np.ndarray, objective: float) -> float:
    if objective <= 0:
        return 0.0
    radial = math.fsum(2.0 * model.inst.cost[b.v, b.r] * values[b.z_col[b.v]] for b in model.blocks)
    return min(1.0, max(0.0, 1.0 - radial / objective))


def solve_lp_cutting_plane(inst: Instance, *, method: str = "highs",
                           max_rounds: int = MAX_ROUNDS, tol: float = SEPARATION_TOL) -> LpSolution:
    if inst.k < 3:
        raise ValueError("LP rounding requires k >= 3")
    start = time.perf_counter()
    model = build_base_lp(inst)
    warm = WarmHighs(model) if method == "highs" and _Highs is not None else None
    if warm is None and method == "highs":
        log.info("warm-start HiGHS unavailable; re-solving every round")
    for rnd in range(1, max_rounds + 1):
        values = warm.solve() if warm is not None else lp_solve(model, method)
        cuts = separate_cuts(model, values, tol)
        log.debug("round %d: %d cuts", rnd, len(cuts))
        if not cuts:
            objective = float(model.cost @ values)
            return LpSolution(model, values, objective,
                              compute_delta(model, values, objective),
                              rounds=rnd, seconds=time.perf_counter() - start)
        for cut in cuts:
            model.add_cut(cut)
    raise LpError(f"cutting plane did not converge within {max_rounds} rounds "
                  f"({len(model.cuts)} cuts added)")
