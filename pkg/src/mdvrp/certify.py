"""Feasibility checks, per-run cost certificates and guarantee arithmetic."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .instance import Instance, Solution, UnknownNodeError, walk_cost
from .pruning import BETA, DELTA, constant_checks
from .sampling import DEFAULT_GAMMA


def check_feasible(inst: Instance, sol: Solution, *, cost_tol: float | None = None) -> list[str]:
    """Violations of coverage, capacity, rooting and stated tour costs; empty if feasible."""
    problems: list[str] = []
    covered: set[int] = set()
    tol = 1e-6 * inst.scale() if cost_tol is None else cost_tol
    for i, tour in enumerate(sol.tours):
        label = f"tour {i} ({tour.root}: {' '.join(tour.clients)})"
        try:
            root = inst.node(tour.root)
            clients = [inst.node(c) for c in tour.clients]
        except UnknownNodeError as e:
            problems.append(f"{label}: unknown node {e.args[0]!r}")
            continue
        if not inst.is_depot(root):
            problems.append(f"{label}: root {tour.root!r} is not a depot")
        if not clients:
            problems.append(f"{label}: visits no client")
        if len(clients) > inst.k:
            problems.append(f"{label}: {len(clients)} clients exceed capacity k={inst.k}")
        if any(inst.is_depot(c) for c in clients):
            problems.append(f"{label}: visits a depot as a client")
        if len(set(clients)) != len(clients):
            problems.append(f"{label}: repeats a client")
        actual = walk_cost(inst, [root, *clients])
        if abs(actual - tour.cost) > tol:
            problems.append(f"{label}: stated cost {tour.cost} differs from walk cost {actual}")
        covered.update(clients)
    for v in inst.client_indices:
        if v not in covered:
            problems.append(f"client {inst.ids[v]!r} is on no tour")
    return problems


@dataclass
class CostCertificate:
    """Quantities a run is charged against; names follow the cost ledger."""

    seed: int
    gamma: float
    beta: float
    opt_lp: float
    delta: float
    lb: float
    paths_cost: float              # c(P) after deduplication
    forest_cost: float             # c(F) before pruning
    residual_forest_cost: float    # c(F') after pruning
    ell_paths: float               # l(C - U), clients on paths
    ell_uncovered: float           # l(U) before pruning
    ell_residual: float            # l(U') after pruning
    pruning_tours: float
    partition_tours: float
    n_paths: int = 0
    n_uncovered: int = 0

    @property
    def total(self) -> float:
        return self.pruning_tours + self.partition_tours

    def bounds(self) -> dict[str, tuple[float, float]]:
        """``name -> (lhs, rhs)`` for the three ledger inequalities."""
        ib = 1.0 / self.beta
        return {
            "pruning": (self.pruning_tours,
                        2.5 * (self.forest_cost - self.residual_forest_cost)
                        + ib * (self.ell_uncovered - self.ell_residual)),
            "partition": (self.partition_tours,
                          2 * self.paths_cost + 2.5 * self.residual_forest_cost
                          + self.ell_paths + ib * self.ell_residual),
            "total": (self.total,
                      2 * self.paths_cost + 2.5 * self.forest_cost + self.lb
                      + (ib - 1.0) * self.ell_uncovered),
        }

    def as_lines(self) -> list[str]:
        out = [f"{key}\t{value}" for key, value in asdict(self).items()]
        out.append(f"total\t{self.total}")
        for name, (lhs, rhs) in self.bounds().items():
            out.append(f"bound_{name}\t{rhs}")
            out.append(f"holds_{name}\t{int(lhs <= rhs)}")
        return out


def check_certificates(cert: CostCertificate, tol: float) -> list[str]:
    """Violated ledger inequalities (empty when all hold within ``tol``)."""
    problems = []
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    for name, (lhs, rhs) in cert.bounds().items():
        if lhs > rhs + tol:
            problems.append(f"{name} certificate violated: {lhs} > {rhs} (+{tol})")
    for key, value in asdict(cert).items():
        if isinstance(value, float) and value < -tol:
            problems.append(f"negative certificate entry {key}={value}")
    return problems


def ratio_at(delta: float, gamma: float = DEFAULT_GAMMA, beta: float = BETA) -> float:
    """Expected-cost ratio to the LP optimum for a given slack ``delta``."""
    return (2 * gamma * (1 + delta) + (2.5 + (1 - delta) * (1 / beta - 1)) * math.exp(-gamma)
            + (1 - delta))


@dataclass
class GuaranteeReport:
    ratio_at_zero: float
    slope: float
    ratio_at_one: float
    best_gamma: float
    constants: dict[str, bool]

    @property
    def constants_hold(self) -> bool:
        return all(self.constants.values())


class ConstantError(ValueError):
    pass


def guarantee_arithmetic(gamma: float = DEFAULT_GAMMA, beta: float = BETA, delta: float = DELTA,
                         *, strict: bool = False) -> GuaranteeReport:
    """Evaluate the guarantee, its slope in ``delta``, and the optimal ``gamma``.

    The guarantee is affine in ``delta`` with intercept
    ``2g + (1.5 + 1/beta) e^-g + 1`` and slope ``2g - (1/beta - 1) e^-g - 1``.
    ``best_gamma = ln((1.5 + 1/beta) / 2)`` minimises the intercept.  With
    ``strict`` a failed constant inequality raises :class:`ConstantError`;
    otherwise it is only reported.
    """
    checks = constant_checks(beta, delta)
    if strict and not all(checks.values()):
        failed = [name for name, ok in checks.items() if not ok]
        raise ConstantError(f"constant inequalities fail: {failed}")
    slope = 2 * gamma - (1 / beta - 1) * math.exp(-gamma) - 1
    return GuaranteeReport(ratio_at(0.0, gamma, beta), slope, ratio_at(1.0, gamma, beta),
                           math.log((1.5 + 1 / beta) / 2), checks)


def exact_margin(beta=BETA, delta=DELTA) -> Fraction:
    """``1/beta - (2 - 0.5/Delta)`` in exact arithmetic (negative means it fails)."""
    b = Fraction(str(beta))
    d = Fraction(str(delta))
    return 1 / b - (2 - Fraction(1, 2) / d)
