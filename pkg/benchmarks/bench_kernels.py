"""Time the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is run on
the same random input under both backends; results are compared before
timings are reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mdvrp import kernels


def _time(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def _cases(rng: np.random.Generator):
    pts = rng.random((12, 2))
    dist = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    yield "held_karp n=12", lambda: kernels.held_karp_table(dist)

    w = rng.random((14, 14)) + 0.1
    w[rng.random((14, 14)) < 0.3] = np.inf
    np.fill_diagonal(w, np.inf)
    yield "subset_arborescence n=14", lambda: kernels.subset_arborescence(w)[0]

    cap = rng.random((40, 40))
    cap[rng.random((40, 40)) < 0.6] = 0.0
    np.fill_diagonal(cap, 0.0)
    yield "max_flow n=40", lambda: kernels.max_flow(cap, 0, 39)[0]


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if kernels._available is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<28}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, fn in _cases(rng):
        kernels.set_backend("python")
        t_py, r_py = _time(fn, args.repeat)
        kernels.set_backend("cython")
        t_cy, r_cy = _time(fn, args.repeat)
        if not np.allclose(np.asarray(r_py), np.asarray(r_cy), rtol=1e-9, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<28}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
