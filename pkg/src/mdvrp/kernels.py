"""Backend selection for the hot loops.

The compiled extension ``mdvrp._kernels`` is used when it imports;
otherwise, or when ``MDVRP_KERNELS=python`` is set, the pure-Python
versions run.  Exact (``Fraction``) inputs always take the Python path.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

INF = float("inf")

_compiled = None
if os.environ.get("MDVRP_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

_available = _compiled
BACKEND = "cython" if _compiled is not None else "python"


def set_backend(name: str) -> str:
    """Switch between ``"cython"`` and ``"python"`` at runtime; returns the previous backend."""
    global _compiled, BACKEND
    if name not in ("cython", "python"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "cython" and _available is None:
        raise RuntimeError("compiled kernels are not built")
    previous = BACKEND
    _compiled = _available if name == "cython" else None
    BACKEND = name
    return previous


def held_karp_table(dist: np.ndarray) -> np.ndarray:
    if _compiled is not None:
        return _compiled.held_karp_table(dist)
    table = _kernels_py.held_karp_table(np.asarray(dist, float).tolist())
    return np.array(table, dtype=float).reshape(len(table), -1)


def closed_tour_costs(dist: np.ndarray, dp: np.ndarray) -> np.ndarray:
    if _compiled is not None:
        return _compiled.closed_tour_costs(dist, dp)
    return np.array(_kernels_py.closed_tour_costs(np.asarray(dist, float).tolist(),
                                                  np.asarray(dp).tolist()))


def subset_arborescence(w, exact: bool = False):
    """See :func:`_kernels_py.subset_arborescence`.

    Float mode takes a matrix with ``inf`` for absent arcs and returns numpy
    arrays (``inf`` for unreachable sets).  Exact mode takes nested lists
    with ``None`` for absent arcs and returns lists.
    """
    if exact:
        return _kernels_py.subset_arborescence(w)
    w = np.asarray(w, dtype=float)
    if _compiled is not None:
        return _compiled.subset_arborescence(w)
    lists = [[None if x == INF else float(x) for x in row] for row in w]
    best, leaf, parent = _kernels_py.subset_arborescence(lists)
    return (np.array([INF if b is None else b for b in best]),
            np.array(leaf, dtype=np.int64), np.array(parent, dtype=np.int64))


def max_flow(cap, s: int, t: int, exact: bool = False):
    """Max ``s -> t`` flow on a dense matrix; returns ``(value, net_flow)``."""
    if exact:
        return _kernels_py.max_flow(cap, s, t)
    if _compiled is not None:
        return _compiled.max_flow(np.asarray(cap, dtype=float), s, t)
    value, flow = _kernels_py.max_flow(np.asarray(cap, float).tolist(), s, t)
    return value, np.array(flow, dtype=float)
