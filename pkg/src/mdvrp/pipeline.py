"""The LP-rounding algorithm end to end.

:func:`prepare` does the seed-independent work (LP relaxation and one
certified branching decomposition per depot/far-client pair);
:func:`round_once` does one seeded rounding: sample paths, graft the
uncovered clients with a rooted forest, prune, and split.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .certify import CostCertificate, check_certificates, check_feasible
from .decomposition import WeightedBranchingSet, decompose_preflow
from .exact import MAX_CLIENTS, brute_force_opt
from .flow import Preflow, connectivity_profile, rationalize, repair_to_flow
from .forest import RootedForest, Tree, min_rooted_forest
from .instance import Instance, Solution, Tour, make_tour, radial_lb, split_zero_radial, zero_radial_tours
from .lp import LpSolution, solve_lp_cutting_plane
from .partition import PartitionResult, partition_path
from .pruning import BETA, PruneState, prune_tree
from .sampling import DEFAULT_GAMMA, SamplingOutcome, deduplicate, sample_paths

log = logging.getLogger(__name__)

DROPPED_MASS_TOL = 1e-6


class PipelineError(RuntimeError):
    pass


@dataclass
class PairDecomposition:
    r: int
    v: int
    preflow: Preflow
    budget: Fraction
    profile: dict[int, Fraction]
    branchings: WeightedBranchingSet
    dropped: Fraction


@dataclass
class Prepared:
    inst: Instance                 # instance as given
    reduced: Instance              # zero-radial clients stripped
    zero_ids: list[str]
    gamma: float
    lp: LpSolution | None
    pairs: dict[tuple[int, int], PairDecomposition]
    seconds: float = 0.0

    @property
    def decompositions(self) -> dict[tuple[int, int], WeightedBranchingSet]:
        return {key: p.branchings for key, p in self.pairs.items()}


def decompose_pair(lp: LpSolution, r: int, v: int, gamma: Fraction) -> PairDecomposition:
    """Exact decomposition of ``gamma * x[r,v]`` with budget ``2 gamma z[r,v,v]``.

    The float LP flow is rationalised, then cleaned to an exact flow by a
    path/cycle decomposition; the budget is capped at the connectivity of
    ``v`` so ``v`` lies on every branching.
    """
    raw = {e: rationalize(x) for e, x in lp.flow(r, v).items()}
    kept, dropped = repair_to_flow(raw, r, v)
    if dropped > DROPPED_MASS_TOL:
        raise PipelineError(f"pair ({r},{v}): flow repair dropped mass {float(dropped)}")
    preflow = Preflow(r, {e: gamma * val for e, val in kept.items()})
    profile = connectivity_profile(preflow) if kept else {}
    budget = min(2 * gamma * rationalize(lp.z(r, v, v)), profile.get(v, Fraction(0)))
    wbs = decompose_preflow(preflow, budget, profile=profile)
    return PairDecomposition(r, v, preflow, budget, profile, wbs, dropped)


def prepare(inst: Instance, *, gamma: float = DEFAULT_GAMMA, lp_method: str = "highs") -> Prepared:
    if not 0 < gamma <= 0.5:
        raise ValueError(f"gamma={gamma} outside (0, 1/2]")
    start = time.perf_counter()
    reduced, zero = split_zero_radial(inst)
    if reduced.k < 3 or reduced.n == 0:
        return Prepared(inst, reduced, zero, gamma, None, {}, time.perf_counter() - start)
    lp = solve_lp_cutting_plane(reduced, method=lp_method)
    g = Fraction(str(gamma))
    pairs = {}
    for r, v in lp.active_pairs():
        dec = decompose_pair(lp, r, v, g)
        if dec.branchings.items:
            pairs[(r, v)] = dec
    return Prepared(inst, reduced, zero, gamma, lp, pairs, time.perf_counter() - start)


@dataclass
class RunResult:
    solution: Solution
    seed: int
    certificate: CostCertificate | None = None
    sampling: SamplingOutcome | None = None
    forest: RootedForest | None = None
    pruned: list[PruneState] = field(default_factory=list)
    partitions: list[PartitionResult] = field(default_factory=list)
    method: str = "lp-round"

    @property
    def cost(self) -> float:
        return self.solution.cost


def _small_capacity(prep: Prepared, seed: int) -> RunResult:
    inst, reduced = prep.inst, prep.reduced
    tours: list[Tour] = []
    if reduced.n:
        if reduced.k == 1:
            tours = [make_tour(reduced, reduced.nearest_depot(v), [v]) for v in reduced.client_indices]
            method = "singletons"
        elif reduced.k == 2:
            if reduced.n > MAX_CLIENTS:
                raise PipelineError(
                    f"k=2 is solved exactly only up to {MAX_CLIENTS} clients (got {reduced.n})")
            tours = list(brute_force_opt(reduced).tours)
            method = "exact"
        else:
            raise AssertionError("unreachable")
    else:
        method = "trivial"
    tours += zero_radial_tours(inst, prep.zero_ids)
    return RunResult(Solution(tuple(tours)), seed, method=method)


def round_once(prep: Prepared, seed: int, *, rule: str = "proof", check: bool = True) -> RunResult:
    """One seeded rounding of a prepared instance."""
    if prep.lp is None:
        return _small_capacity(prep, seed)
    inst = prep.reduced
    rng = np.random.default_rng(seed)
    raw, indicators = sample_paths(inst, prep.decompositions, prep.gamma, rng)
    outcome = deduplicate(inst, raw)
    outcome.indicators = indicators
    outcome.seed = seed

    on_path = [v for p in outcome.paths for v in p.clients]
    roots = list(inst.depot_indices) + on_path
    forest = min_rooted_forest(inst, roots, outcome.uncovered)
    pruned = [prune_tree(inst, t, check=check) for t in forest.trees]

    path_of = {v: i for i, p in enumerate(outcome.paths) for v in p.clients}
    lines: list[list[int]] = [p.nodes for p in outcome.paths]
    attached: list[list[tuple[Tree, frozenset]]] = [[] for _ in lines]
    depot_line: dict[int, int] = {}
    for st in pruned:
        item = (st.tree, frozenset(st.uncovered))
        if st.root in path_of:
            attached[path_of[st.root]].append(item)
        else:
            if st.root not in depot_line:
                depot_line[st.root] = len(lines)
                lines.append([st.root])
                attached.append([])
            attached[depot_line[st.root]].append(item)
    parts = [partition_path(inst, line, trees, rule=rule, check=check)
             for line, trees in zip(lines, attached)]

    rad = inst.radial()
    cert = CostCertificate(
        seed=seed, gamma=prep.gamma, beta=BETA,
        opt_lp=prep.lp.objective, delta=prep.lp.delta, lb=radial_lb(inst),
        paths_cost=outcome.cost, forest_cost=forest.cost,
        residual_forest_cost=math.fsum(st.cost(inst) for st in pruned),
        ell_paths=math.fsum(rad[v] for v in on_path),
        ell_uncovered=math.fsum(rad[v] for v in outcome.uncovered),
        ell_residual=math.fsum(rad[v] for st in pruned for v in st.uncovered),
        pruning_tours=math.fsum(t.cost for st in pruned for t in st.tours),
        partition_tours=math.fsum(t.cost for p in parts for t in p.tours),
        n_paths=len(outcome.paths), n_uncovered=len(outcome.uncovered))

    tours = [t for st in pruned for t in st.tours] + [t for p in parts for t in p.tours]
    tours += zero_radial_tours(prep.inst, prep.zero_ids)
    sol = Solution(tuple(tours))
    if check:
        problems = check_certificates(cert, 1e-6 * inst.scale())
        problems += check_feasible(prep.inst, sol)
        if problems:
            raise PipelineError("; ".join(problems))
    return RunResult(sol, seed, cert, outcome, forest, pruned, parts)


def lp_round(inst: Instance, seed: int = 0, *, gamma: float = DEFAULT_GAMMA, rule: str = "proof",
             lp_method: str = "highs", check: bool = True) -> RunResult:
    return round_once(prepare(inst, gamma=gamma, lp_method=lp_method), seed, rule=rule, check=check)
