"""Instances, tours, solutions and their text formats.

Node indices follow declaration order: depots first (``0..m-1``), then
clients (``m..m+n-1``).  Identifiers are strings and are what the file
formats and :class:`Tour` carry; algorithms work on indices internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

FORMAT_TAG = "mdvrp 1"
CLUSTER_SIGMA = 0.05


class ParseError(ValueError):
    """Malformed instance or solution text."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class UnknownNodeError(KeyError):
    pass


def metric_closure(raw_costs) -> np.ndarray:
    """All-pairs shortest-path closure of a symmetric cost matrix."""
    d = np.array(raw_costs, dtype=float, copy=True)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("cost matrix must be square")
    if np.any(d < 0):
        raise ValueError("negative cost in input")
    if not np.allclose(d, d.T, rtol=0.0, atol=1e-9):
        raise ValueError("cost matrix is not symmetric")
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    for w in range(d.shape[0]):
        np.minimum(d, d[:, w, None] + d[None, w, :], out=d)
    return d


@dataclass(frozen=True, eq=False)
class Instance:
    """Metric CVRP-MD instance.  Immutable once built."""

    depots: tuple[str, ...]
    clients: tuple[str, ...]
    k: int
    cost: np.ndarray
    coords: np.ndarray | None = None
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        ids = self.depots + self.clients
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node identifiers")
        if not self.depots:
            raise ValueError("at least one depot required")
        if self.k < 1:
            raise ValueError("capacity k must be >= 1")
        cost = np.array(self.cost, dtype=float)
        if cost.shape != (len(ids), len(ids)):
            raise ValueError("cost matrix shape does not match node count")
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float)
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "index", {s: i for i, s in enumerate(ids)})

    @classmethod
    def from_coords(cls, depots, clients, k, depot_xy, client_xy) -> Instance:
        xy = np.vstack([np.asarray(depot_xy, float).reshape(-1, 2),
                        np.asarray(client_xy, float).reshape(-1, 2)])
        diff = xy[:, None, :] - xy[None, :, :]
        raw = np.sqrt((diff ** 2).sum(axis=2))
        return cls(tuple(depots), tuple(clients), int(k), metric_closure(raw), xy)

    @classmethod
    def from_matrix(cls, depots, clients, k, matrix) -> Instance:
        return cls(tuple(depots), tuple(clients), int(k), metric_closure(matrix))

    @property
    def m(self) -> int:
        return len(self.depots)

    @property
    def n(self) -> int:
        return len(self.clients)

    @property
    def ids(self) -> tuple[str, ...]:
        return self.depots + self.clients

    @property
    def depot_indices(self) -> range:
        return range(self.m)

    @property
    def client_indices(self) -> range:
        return range(self.m, self.m + self.n)

    def is_depot(self, i: int) -> bool:
        return i < self.m

    def depot_distance(self) -> np.ndarray:
        """``c(v, R)`` for every node (0 for depots)."""
        return self.cost[:, : self.m].min(axis=1)

    def nearest_depot(self, i: int) -> int:
        # argmin returns the first minimiser, i.e. the smallest depot index
        return int(np.argmin(self.cost[i, : self.m]))

    def radial(self) -> np.ndarray:
        """Per-node radial contribution ``(2/k) c(v, R)``; zero at depots."""
        return 2.0 * self.depot_distance() / self.k

    def diameter(self) -> float:
        return float(self.cost.max()) if self.cost.size else 0.0

    def scale(self) -> float:
        """Absolute tolerance scale for certificate comparisons."""
        return max(self.diameter(), 1.0) * max(self.n, 1)

    def node(self, ident: str) -> int:
        try:
            return self.index[ident]
        except KeyError:
            raise UnknownNodeError(ident) from None

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        same_coords = (self.coords is None) == (other.coords is None) and (
            self.coords is None or np.array_equal(self.coords, other.coords))
        return (self.depots == other.depots and self.clients == other.clients
                and self.k == other.k and np.array_equal(self.cost, other.cost)
                and same_coords)

    __hash__ = None

    def scaled(self, s: float) -> Instance:
        coords = None if self.coords is None else self.coords * s
        return Instance(self.depots, self.clients, self.k, self.cost * s, coords)

    def restrict(self, client_ids: Iterable[str]) -> Instance:
        """Sub-instance with all depots and the given clients (declaration order kept)."""
        keep = set(client_ids)
        clients = tuple(c for c in self.clients if c in keep)
        idx = list(self.depot_indices) + [self.index[c] for c in clients]
        coords = None if self.coords is None else self.coords[idx]
        return Instance(self.depots, clients, self.k, self.cost[np.ix_(idx, idx)], coords)


@dataclass(frozen=True)
class Tour:
    root: str
    clients: tuple[str, ...]
    cost: float

    def __post_init__(self):
        if not self.clients:
            raise ValueError("tour visits no client")


@dataclass(frozen=True)
class Solution:
    tours: tuple[Tour, ...]

    @property
    def cost(self) -> float:
        return math.fsum(t.cost for t in self.tours)


def walk_cost(inst: Instance, nodes: Sequence[int]) -> float:
    """Cost of the closed walk through ``nodes`` (back to ``nodes[0]``)."""
    if len(nodes) < 2:
        return 0.0
    c = inst.cost
    return math.fsum(c[nodes[i], nodes[(i + 1) % len(nodes)]] for i in range(len(nodes)))


def path_cost(inst: Instance, nodes: Sequence[int]) -> float:
    c = inst.cost
    return math.fsum(c[a, b] for a, b in zip(nodes, nodes[1:]))


def make_tour(inst: Instance, root: int, clients: Sequence[int]) -> Tour:
    if not inst.is_depot(root):
        raise ValueError(f"tour root {inst.ids[root]!r} is not a depot")
    nodes = [root, *clients]
    return Tour(inst.ids[root], tuple(inst.ids[v] for v in clients), walk_cost(inst, nodes))


def tour_nodes(inst: Instance, tour: Tour) -> list[int]:
    return [inst.node(tour.root)] + [inst.node(c) for c in tour.clients]


def solution_cost(inst: Instance, sol: Solution) -> float:
    """Sum of closed-walk costs, recomputed from the instance."""
    return math.fsum(walk_cost(inst, tour_nodes(inst, t)) for t in sol.tours)


def radial_lb(inst: Instance) -> float:
    return float(math.fsum(inst.radial()[inst.m:]))


def ell(inst: Instance, nodes: Iterable[int]) -> float:
    r = inst.radial()
    return math.fsum(r[v] for v in nodes)


def split_zero_radial(inst: Instance) -> tuple[Instance, list[str]]:
    """Strip clients located on a depot; they are served by free singleton tours."""
    dist = inst.depot_distance()
    zero = [inst.ids[v] for v in inst.client_indices if dist[v] <= 0.0]
    if not zero:
        return inst, []
    return inst.restrict(c for c in inst.clients if c not in set(zero)), zero


def zero_radial_tours(inst: Instance, ids: Iterable[str]) -> list[Tour]:
    tours = []
    for ident in ids:
        v = inst.node(ident)
        tours.append(make_tour(inst, inst.nearest_depot(v), [v]))
    return tours


# --------------------------------------------------------------------------
# text formats


def _fmt(x: float) -> str:
    return repr(float(x))


def write_instance(inst: Instance) -> str:
    mode = "coords" if inst.coords is not None else "matrix"
    out = [FORMAT_TAG, f"k {inst.k}", f"mode {mode}"]

    def block(name, ids, offset):
        out.append(f"{name} {len(ids)}")
        for i, ident in enumerate(ids):
            if mode == "coords":
                x, y = inst.coords[offset + i]
                out.append(f"{ident} {_fmt(x)} {_fmt(y)}")
            else:
                out.append(ident)

    block("depots", inst.depots, 0)
    block("clients", inst.clients, inst.m)
    if mode == "matrix":
        out.append("matrix")
        for row in inst.cost:
            out.append(" ".join(_fmt(x) for x in row))
    return "\n".join(out) + "\n"


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_instance(text: str) -> Instance:
    lines = list(_content_lines(text))
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] if lines else 0
            raise ParseError(last + 1, f"unexpected end of file, expected {what}")
        item = lines[pos]
        pos += 1
        return item

    def keyword(name):
        lineno, line = take(name)
        parts = line.split()
        if parts[0] != name or len(parts) != 2:
            raise ParseError(lineno, f"expected '{name} <value>', got {line!r}")
        return lineno, parts[1]

    lineno, line = take("header")
    if line.split() != FORMAT_TAG.split():
        raise ParseError(lineno, f"bad header {line!r}")
    lineno, val = keyword("k")
    try:
        k = int(val)
    except ValueError:
        raise ParseError(lineno, f"capacity is not an integer: {val!r}") from None
    if k < 1:
        raise ParseError(lineno, "capacity k must be >= 1")
    lineno, mode = keyword("mode")
    if mode not in ("coords", "matrix"):
        raise ParseError(lineno, f"unknown mode {mode!r}")

    seen: set[str] = set()

    def node_block(name):
        lineno, val = keyword(name)
        try:
            count = int(val)
        except ValueError:
            raise ParseError(lineno, f"bad {name} count {val!r}") from None
        if count < (1 if name == "depots" else 0):
            raise ParseError(lineno, f"bad {name} count {count}")
        ids, xy = [], []
        for _ in range(count):
            lineno, line = take(f"{name} entry")
            parts = line.split()
            want = 3 if mode == "coords" else 1
            if len(parts) != want:
                raise ParseError(lineno, f"expected {want} fields, got {len(parts)}")
            if parts[0] in seen:
                raise ParseError(lineno, f"duplicate identifier {parts[0]!r}")
            seen.add(parts[0])
            ids.append(parts[0])
            if mode == "coords":
                try:
                    xy.append((float(parts[1]), float(parts[2])))
                except ValueError:
                    raise ParseError(lineno, "bad coordinate") from None
        return ids, xy

    depots, dxy = node_block("depots")
    clients, cxy = node_block("clients")
    if mode == "coords":
        inst = Instance.from_coords(depots, clients, k, dxy, cxy)
    else:
        lineno, line = take("matrix")
        if line != "matrix":
            raise ParseError(lineno, f"expected 'matrix', got {line!r}")
        size = len(depots) + len(clients)
        rows, row_lines = [], []
        for _ in range(size):
            lineno, line = take("matrix row")
            try:
                row = [float(x) for x in line.split()]
            except ValueError:
                raise ParseError(lineno, "non-numeric matrix entry") from None
            if len(row) != size:
                raise ParseError(lineno, f"matrix row has {len(row)} entries, expected {size}")
            if any(x < 0 for x in row):
                raise ParseError(lineno, "negative cost")
            rows.append(row)
            row_lines.append(lineno)
        mat = np.array(rows)
        for i in range(size):
            if abs(mat[i, i]) > 1e-9:
                raise ParseError(row_lines[i], "nonzero diagonal entry")
            for j in range(i):
                if abs(mat[i, j] - mat[j, i]) > 1e-9:
                    raise ParseError(row_lines[i], f"matrix asymmetric at ({i}, {j})")
        inst = Instance.from_matrix(depots, clients, k, mat)
    if pos != len(lines):
        raise ParseError(lines[pos][0], "trailing content")
    return inst


def write_solution(sol: Solution) -> str:
    out = [f"{t.root}: {' '.join(t.clients)}" for t in sol.tours]
    out.append(f"cost {sol.cost:.6f}")
    return "\n".join(out) + "\n"


def parse_solution(text: str, inst: Instance) -> Solution:
    tours = []
    saw_cost = False
    for lineno, line in _content_lines(text):
        if saw_cost:
            raise ParseError(lineno, "content after cost line")
        if line.startswith("cost"):
            saw_cost = True
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(lineno, f"expected '<depot>: <clients>', got {line!r}")
        try:
            root = inst.node(head.strip())
            clients = [inst.node(c) for c in rest.split()]
        except UnknownNodeError as e:
            raise ParseError(lineno, f"unknown node {e.args[0]!r}") from None
        if not clients:
            raise ParseError(lineno, "tour without clients")
        if not inst.is_depot(root):
            raise ParseError(lineno, f"{head.strip()!r} is not a depot")
        tours.append(make_tour(inst, root, clients))
    if not saw_cost:
        raise ParseError(0, "missing cost line")
    return Solution(tuple(tours))


# --------------------------------------------------------------------------
# generator


def generate_random(seed: int, n_clients: int, n_depots: int, k: int,
                    mode: str = "euclidean-uniform", clusters: int = 3) -> Instance:
    """Seeded Euclidean instance in the unit square.

    Clustered mode draws ``clusters`` centres uniformly and places every node
    at a centre plus an N(0, 0.05^2) offset per axis, clipped to the square.
    """
    if n_clients < 1 or n_depots < 1 or k < 1:
        raise ValueError("n_clients, n_depots and k must be positive")
    rng = np.random.default_rng(seed)
    total = n_clients + n_depots
    if mode == "euclidean-uniform":
        xy = rng.random((total, 2))
    elif mode == "euclidean-clustered":
        centres = rng.random((clusters, 2))
        label = rng.integers(0, clusters, size=total)
        xy = np.clip(centres[label] + rng.normal(0.0, CLUSTER_SIGMA, (total, 2)), 0.0, 1.0)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    depots = [f"d{i}" for i in range(n_depots)]
    clients = [f"c{i}" for i in range(n_clients)]
    return Instance.from_coords(depots, clients, k, xy[:n_depots], xy[n_depots:])
