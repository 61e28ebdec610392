"""Dense revised simplex.

Works on ``float`` or, with ``exact=True``, on :class:`fractions.Fraction`
via numpy object arrays.  Pricing is Dantzig's rule until a run of
degenerate pivots exceeds ``bland_after``, then Bland's rule, which
guarantees termination.  Solutions are basic, i.e. vertices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

log = logging.getLogger(__name__)

BLAND_AFTER = 1000


class SimplexError(RuntimeError):
    pass


class Infeasible(SimplexError):
    pass


class Unbounded(SimplexError):
    pass


def _as_array(values, exact):
    if exact:
        arr = np.empty(np.shape(values), dtype=object)
        flat = arr.reshape(-1)
        for i, v in enumerate(np.asarray(values, dtype=object).reshape(-1)):
            flat[i] = Fraction(v)
        return arr
    return np.array(values, dtype=float)


class RevisedSimplex:
    """``min c x  s.t.  A x = b, x >= 0`` from a given primal-feasible basis.

    Columns may be appended between solves (column generation); the current
    basis is kept, so each :meth:`solve` warm-starts.
    """

    def __init__(self, A, b, c, basis, *, exact=False, tol=1e-9,
                 bland_after=BLAND_AFTER, refactor_every=50):
        self.exact = exact
        self.tol = 0 if exact else tol
        self.A = _as_array(A, exact)
        self.b = _as_array(b, exact)
        self.c = _as_array(c, exact)
        self.m = self.A.shape[0]
        self.basis = list(basis)
        if len(self.basis) != self.m:
            raise ValueError("basis size must equal row count")
        self.bland_after = bland_after
        self.refactor_every = refactor_every
        self.pivots = 0
        self.degenerate_run = 0
        self._refactor()

    # -- linear algebra ---------------------------------------------------

    def _refactor(self):
        B = self.A[:, self.basis]
        if self.exact:
            self.Binv = _exact_inverse(B)
        else:
            cond = np.linalg.cond(B)
            if not np.isfinite(cond) or cond > 1e13:
                raise SimplexError(f"basis matrix ill-conditioned (cond={cond:.3g})")
            self.Binv = np.linalg.inv(B)
        self.xB = self.Binv @ self.b
        self._since_refactor = 0

    def add_column(self, col, cost):
        col = _as_array(col, self.exact).reshape(-1, 1)
        self.A = np.concatenate([self.A, col], axis=1)
        self.c = np.append(self.c, _as_array([cost], self.exact))
        return self.A.shape[1] - 1

    def duals(self):
        return self.c[self.basis] @ self.Binv

    def reduced_costs(self):
        return self.c - self.duals() @ self.A

    def x(self):
        out = np.zeros(self.A.shape[1], dtype=object if self.exact else float)
        if self.exact:
            out[:] = Fraction(0)
        out[self.basis] = self.xB
        return out

    def objective(self):
        return self.c[self.basis] @ self.xB

    # -- iterations -------------------------------------------------------

    def _entering(self, d):
        neg = np.flatnonzero(d < -self.tol)
        if neg.size == 0:
            return None
        if self.degenerate_run >= self.bland_after:
            return int(neg[0])
        return int(neg[np.argmin(d[neg])])

    def _leaving(self, col):
        pos = np.flatnonzero(col > self.tol)
        if pos.size == 0:
            return None
        ratios = self.xB[pos] / col[pos]
        best = min(ratios)
        cands = [int(p) for p, q in zip(pos, ratios)
                 if (q == best if self.exact else q <= best + 1e-12)]
        # smallest basic variable index among ties (Bland-compatible)
        return min(cands, key=lambda p: self.basis[p])

    def pivot(self, enter, row, col=None):
        if col is None:
            col = self.Binv @ self.A[:, enter]
        piv = col[row]
        step = self.xB[row] / piv
        degenerate = (step == 0) if self.exact else (abs(step) <= self.tol)
        if degenerate:
            self.degenerate_run += 1
        else:
            self.degenerate_run = 0
        self.xB = self.xB - step * col
        self.xB[row] = step
        prow = self.Binv[row] / piv
        self.Binv = self.Binv - np.outer(col, prow)
        self.Binv[row] = prow
        self.basis[row] = enter
        self.pivots += 1
        self._since_refactor += 1
        if not self.exact:
            np.maximum(self.xB, 0.0, out=self.xB, where=self.xB > -self.tol)
            if self._since_refactor >= self.refactor_every:
                self._refactor()

    def solve(self, max_iter=100_000):
        for _ in range(max_iter):
            enter = self._entering(self.reduced_costs())
            if enter is None:
                return self
            col = self.Binv @ self.A[:, enter]
            row = self._leaving(col)
            if row is None:
                raise Unbounded("objective unbounded below")
            self.pivot(enter, row, col)
        raise SimplexError(f"iteration limit {max_iter} reached")


def _exact_inverse(B):
    m = B.shape[0]
    aug = np.empty((m, 2 * m), dtype=object)
    aug[:, :m] = B
    aug[:, m:] = Fraction(0)
    for i in range(m):
        aug[i, m + i] = Fraction(1)
    for colno in range(m):
        piv = next((r for r in range(colno, m) if aug[r, colno] != 0), None)
        if piv is None:
            raise SimplexError("singular basis")
        if piv != colno:
            aug[[colno, piv]] = aug[[piv, colno]]
        aug[colno] = aug[colno] / aug[colno, colno]
        for r in range(m):
            if r != colno and aug[r, colno] != 0:
                aug[r] = aug[r] - aug[r, colno] * aug[colno]
    return aug[:, m:]


@dataclass
class LpResult:
    x: np.ndarray
    objective: float
    basis: list[int]
    pivots: int


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *, exact=False,
             tol=1e-9, bland_after=BLAND_AFTER, max_iter=100_000) -> LpResult:
    """``min c x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    Two-phase method on the standard form with one slack per inequality and
    one artificial per row.  Returns a basic optimal solution.
    """
    c = np.asarray(c, dtype=object if exact else float)
    n = c.shape[0]
    rows, rhs, slack_sign = [], [], []
    if A_ub is not None and len(A_ub):
        for row, bi in zip(np.asarray(A_ub, dtype=object if exact else float), b_ub):
            rows.append(row)
            rhs.append(bi)
            slack_sign.append(1)
    if A_eq is not None and len(A_eq):
        for row, bi in zip(np.asarray(A_eq, dtype=object if exact else float), b_eq):
            rows.append(row)
            rhs.append(bi)
            slack_sign.append(0)
    m = len(rows)
    n_slack = sum(1 for s in slack_sign if s)
    width = n + n_slack + m
    A = np.zeros((m, width), dtype=object if exact else float)
    if exact:
        A[:] = Fraction(0)
    b = np.empty(m, dtype=object if exact else float)
    si = 0
    for i, (row, bi, s) in enumerate(zip(rows, rhs, slack_sign)):
        A[i, :n] = row
        if s:
            A[i, n + si] = 1
            si += 1
        b[i] = bi
        if b[i] < 0:
            A[i, : n + n_slack] = -A[i, : n + n_slack]
            b[i] = -b[i]
        A[i, n + n_slack + i] = 1
    art = list(range(n + n_slack, width))
    phase1_cost = np.zeros(width)
    phase1_cost[art] = 1.0
    lp = RevisedSimplex(A, b, phase1_cost, art, exact=exact, tol=tol,
                        bland_after=bland_after)
    lp.solve(max_iter)
    infeas = lp.objective()
    if infeas > (0 if exact else 1e-7 * max(1.0, float(np.max(np.abs(b))) if m else 1.0)):
        raise Infeasible(f"phase 1 ended with infeasibility {float(infeas):.3g}")
    # drive artificials out of the basis where possible
    for row in range(m):
        if lp.basis[row] < n + n_slack:
            continue
        prow = lp.Binv[row] @ lp.A[:, : n + n_slack]
        cand = np.flatnonzero(np.abs(prow.astype(float)) > (0 if exact else 1e-9))
        cand = [j for j in cand if j not in lp.basis]
        if cand:
            lp.pivot(int(cand[0]), row)
    # phase 2: artificials fixed at zero by pricing them out
    cost2 = np.zeros(width, dtype=object if exact else float)
    if exact:
        cost2[:] = Fraction(0)
    cost2[:n] = c
    keep = np.ones(width, dtype=bool)
    keep[art] = False
    lp.c = _as_array(cost2, exact)
    big = [j for j in art if j not in lp.basis]
    for j in big:
        lp.A[:, j] = 0
    lp.solve(max_iter)
    x = lp.x()[:n]
    return LpResult(x=x, objective=lp.c[:n] @ x, basis=list(lp.basis), pivots=lp.pivots)
