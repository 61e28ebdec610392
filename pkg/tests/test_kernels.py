from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from mdvrp import kernels

needs_compiled = pytest.mark.skipif(kernels._available is None, reason="compiled kernels not built")


@pytest.fixture
def restore_backend():
    previous = kernels.BACKEND
    yield
    kernels.set_backend(previous)


def _both(fn):
    kernels.set_backend("python")
    py = fn()
    kernels.set_backend("cython")
    return py, fn()


@needs_compiled
@pytest.mark.parametrize("seed", range(5))
def test_backends_agree(seed, restore_backend):
    rng = np.random.default_rng(seed)
    d = rng.random((7, 7))
    d = d + d.T
    np.fill_diagonal(d, 0)
    a, b = _both(lambda: kernels.held_karp_table(d))
    assert np.allclose(a, b)
    a, b = _both(lambda: kernels.closed_tour_costs(d, kernels.held_karp_table(d)))
    assert np.allclose(a, b)
    w = rng.random((6, 6))
    w[rng.random((6, 6)) < 0.3] = np.inf
    np.fill_diagonal(w, np.inf)
    a, b = _both(lambda: kernels.subset_arborescence(w))
    assert all(np.array_equal(x, y) or np.allclose(x, y) for x, y in zip(a, b))
    cap = rng.random((8, 8)) * (rng.random((8, 8)) < 0.5)
    np.fill_diagonal(cap, 0)
    (va, fa), (vb, fb) = _both(lambda: kernels.max_flow(cap, 0, 7))
    assert va == pytest.approx(vb)


def test_exact_max_flow():
    cap = [[Fraction(0), Fraction(1, 3), Fraction(1, 2)],
           [Fraction(0), Fraction(0), Fraction(1, 3)],
           [Fraction(0), Fraction(0), Fraction(0)]]
    value, _ = kernels.max_flow(cap, 0, 2, exact=True)
    assert value == Fraction(5, 6)


def test_unknown_backend(restore_backend):
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
