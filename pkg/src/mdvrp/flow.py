"""Min cuts, connectivity profiles and rational preflows."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import kernels

DENOMINATOR_LIMIT = 10**9


class PreflowError(ValueError):
    pass


def _dense(nodes, caps, exact):
    pos = {v: i for i, v in enumerate(nodes)}
    zero = Fraction(0) if exact else 0.0
    mat = [[zero] * len(nodes) for _ in nodes]
    for (a, b), val in caps.items():
        mat[pos[a]][pos[b]] += val
    return pos, mat


def min_cut(caps: Mapping[tuple[int, int], float | Fraction], source: int, sink: int,
            nodes=None) -> tuple[float | Fraction, frozenset[int]]:
    """Max ``source -> sink`` flow value and a minimum cut's sink side.

    The returned set is the smallest minimising sink side: the nodes from
    which ``sink`` is reachable in the residual network.  Exact arithmetic is
    used whenever any capacity is a :class:`Fraction`.
    """
    if nodes is None:
        nodes = sorted({source, sink} | {a for a, _ in caps} | {b for _, b in caps})
    if any(v < 0 for v in caps.values()):
        raise ValueError("negative capacity")
    exact = any(isinstance(v, Fraction) for v in caps.values())
    pos, mat = _dense(nodes, caps, exact)
    value, flow = kernels.max_flow(mat, pos[source], pos[sink], exact=exact)
    n = len(nodes)
    side = {pos[sink]}
    stack = [pos[sink]]
    while stack:
        b = stack.pop()
        for a in range(n):
            if a not in side and mat[a][b] - flow[a][b] > (0 if exact else 1e-12):
                side.add(a)
                stack.append(a)
    return value, frozenset(nodes[i] for i in side)


@dataclass(frozen=True)
class Preflow:
    """Arc values ``f`` with in-flow >= out-flow at every node but the root."""

    root: int
    f: Mapping[tuple[int, int], Fraction]

    @property
    def nodes(self) -> list[int]:
        found = {self.root}
        for a, b in self.f:
            found.add(a)
            found.add(b)
        return sorted(found)

    def support(self) -> dict[tuple[int, int], Fraction]:
        return {e: val for e, val in self.f.items() if val > 0}

    def excess(self) -> dict[int, Fraction]:
        exc: dict[int, Fraction] = defaultdict(Fraction)
        for (a, b), val in self.f.items():
            exc[b] += val
            exc[a] -= val
        return dict(exc)

    def is_preflow(self) -> bool:
        return all(val >= 0 for val in self.f.values()) and all(
            e >= 0 for v, e in self.excess().items() if v != self.root)

    def scaled(self, s) -> Preflow:
        return Preflow(self.root, {e: val * s for e, val in self.f.items()})


def connectivity_profile(preflow: Preflow) -> dict[int, Fraction]:
    """``lambda_v``: the ``root -> v`` min-cut value for every other node."""
    caps = preflow.support()
    nodes = preflow.nodes
    return {v: min_cut(caps, preflow.root, v, nodes)[0] for v in nodes if v != preflow.root}


def rationalize(value: float, limit: int = DENOMINATOR_LIMIT) -> Fraction:
    return Fraction(value).limit_denominator(limit)


def repair_to_flow(f: Mapping[tuple[int, int], Fraction], root: int, sink: int):
    """Largest-first path and cycle decomposition of an almost-conserving flow.

    Returns ``(kept, dropped)``: ``kept`` is the exact sum of the extracted
    ``root -> sink`` paths and cycles (so it conserves flow everywhere except
    at ``root`` and ``sink``); ``dropped`` is the total value of walks that
    dead-ended, i.e. the conservation noise removed.  ``kept <= f`` arcwise.
    """
    resid = {e: val for e, val in f.items() if val > 0}
    out: dict[int, list[int]] = defaultdict(list)
    for a, b in resid:
        out[a].append(b)
    kept: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
    dropped = Fraction(0)

    def step(a):
        best = None
        for b in out[a]:
            val = resid.get((a, b), 0)
            if val > 0 and (best is None or (val, -b) > (resid[(a, best)], -best)):
                best = b
        return best

    def take(arcs, keep):
        nonlocal dropped
        amount = min(resid[e] for e in arcs)
        for e in arcs:
            resid[e] -= amount
            if keep:
                kept[e] += amount
        if not keep:
            dropped += amount

    def walk(start):
        seq = [start]
        where = {start: 0}
        while True:
            cur = seq[-1]
            if cur == sink and start == root:
                take(list(zip(seq, seq[1:])), True)
                return
            nxt = step(cur)
            if nxt is None:
                if len(seq) > 1:
                    take(list(zip(seq, seq[1:])), False)
                return
            if nxt in where:
                cyc = seq[where[nxt]:] + [nxt]
                take(list(zip(cyc, cyc[1:])), True)
                return
            where[nxt] = len(seq)
            seq.append(nxt)

    while step(root) is not None:
        walk(root)
    while True:
        live = sorted(e for e, val in resid.items() if val > 0)
        if not live:
            break
        walk(live[0][0])
    return {e: val for e, val in kept.items() if val > 0}, dropped
