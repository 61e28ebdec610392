"""Preflow rounding: sample branchings, turn them into depot-rooted paths."""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .decomposition import Branching, WeightedBranchingSet
from .instance import Instance, path_cost

DEFAULT_GAMMA = 0.46821


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class RootedPath:
    root: int
    clients: tuple[int, ...]
    cost: float

    @property
    def nodes(self) -> list[int]:
        return [self.root, *self.clients]


def make_path(inst: Instance, root: int, clients) -> RootedPath:
    clients = tuple(clients)
    return RootedPath(root, clients, path_cost(inst, [root, *clients]))


def branching_to_path(inst: Instance, b: Branching, v: int) -> RootedPath:
    """``r -> v`` path: off-path subtrees are toured (doubled) on the way.

    Equivalent to shortcutting the Eulerian walk that doubles every arc not
    on the ``r -> v`` path: nodes appear in first-visit order of a DFS that
    enters the child towards ``v`` last, with ``v`` itself moved to the end.
    """
    if v not in b.nodes or v == b.root:
        raise SamplingError(f"node {v} is not a non-root node of the branching")
    parent = b.parent()
    on_path = {v}
    x = v
    while x != b.root:
        x = parent[x]
        on_path.add(x)
    children = b.children()
    order: list[int] = []
    stack = [b.root]
    while stack:
        x = stack.pop()
        if x != b.root and x != v:
            order.append(x)
        kids = sorted(children.get(x, []), key=lambda c: (c in on_path, c))
        stack.extend(reversed(kids))
    order.append(v)
    return make_path(inst, b.root, order)


@dataclass
class SamplingOutcome:
    paths: list[RootedPath]
    uncovered: frozenset[int]
    indicators: dict[tuple[int, int], list[bool]] = field(default_factory=dict)
    seed: int | None = None

    @property
    def cost(self) -> float:
        return float(sum(p.cost for p in self.paths))


def sample_paths(inst: Instance, decomps: dict[tuple[int, int], WeightedBranchingSet],
                 gamma: float, rng: np.random.Generator):
    """Include each branching independently with probability ``mu_i``.

    Pairs are visited in sorted ``(r, v)`` order and branchings in stored
    order, all drawing from the single ``rng`` stream.  Returns the raw path
    list (sampled branchings converted) and the per-branching indicators.
    """
    if not 0 < gamma <= 0.5:
        raise SamplingError(f"gamma={gamma} outside (0, 1/2]")
    raw: list[RootedPath] = []
    indicators: dict[tuple[int, int], list[bool]] = {}
    for (r, v) in sorted(decomps):
        flags = []
        for b, mu in decomps[(r, v)].items:
            if mu > 1:
                raise SamplingError(f"branching weight {mu} > 1 for pair {(r, v)}")
            hit = bool(rng.random() < float(mu))
            flags.append(hit)
            if hit and v in b.nodes:
                raw.append(branching_to_path(inst, b, v))
        indicators[(r, v)] = flags
    return raw, indicators


def deduplicate(inst: Instance, raw: list[RootedPath]) -> SamplingOutcome:
    """Keep each client on exactly one path; drop emptied paths.

    Clients are processed in index order; the surviving occurrence is the one
    on the path with the smallest ``(depot index, path index)``.  Removing an
    occurrence shortcuts the path (or truncates it if it was the last node),
    which by the triangle inequality never increases cost.
    """
    owner: dict[int, tuple[int, int]] = {}
    for idx, p in enumerate(raw):
        for c in p.clients:
            key = (p.root, idx)
            if c not in owner or key < owner[c]:
                owner[c] = key
    paths = []
    for idx, p in enumerate(raw):
        kept = [c for c in p.clients if owner[c] == (p.root, idx)]
        if kept:
            paths.append(make_path(inst, p.root, kept))
    covered = set(owner)
    uncovered = frozenset(v for v in inst.client_indices if v not in covered)
    return SamplingOutcome(paths, uncovered)
