"""Two-phase revised simplex with Dantzig pricing and a Bland fallback against cycling.

Solves ``min c @ x  s.t.  A @ x = b, x >= 0`` for dense problems with a few
hundred rows.  The basis inverse is kept explicitly and refactored
periodically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "InfeasibleLP", "UnboundedLP", "simplex", "min_l1_decomposition"]


class InfeasibleLP(RuntimeError):
    pass


class UnboundedLP(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    iterations: int


_REFACTOR_EVERY = 64
_DEGENERATE_LIMIT = 50
# reduced costs this close to zero are rounding noise when no pivot row exists
_NOISE = 1e-6


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, tol: float, basis=None, pricer=None):
        self.A = A
        self.b = b
        self.tol = tol
        # when A = [C, -C] pricing only needs y @ C, supplied by ``pricer``
        self.pricer = pricer
        m = A.shape[0]
        self.n_real = A.shape[1]
        self.iterations = 0
        self._since_refactor = 0
        if basis is None:
            # artificial columns are the identity and occupy indices n_real..n_real+m-1
            self.basis = np.arange(self.n_real, self.n_real + m)
            self.Binv = np.eye(m)
            self.xB = b.copy()
        else:
            self.basis = np.array(basis, dtype=int)
            if self.basis.shape != (m,) or np.any(self.basis < 0) or np.any(self.basis >= self.n_real):
                raise ValueError("a starting basis needs one real column per row")
            self.refactor()
            if np.any(self.xB < -1e-9 * max(1.0, float(np.max(np.abs(b))))):
                raise ValueError("starting basis is not primal feasible")
            np.maximum(self.xB, 0.0, out=self.xB)

    def column(self, j: int) -> np.ndarray:
        if j < self.n_real:
            return self.A[:, j]
        e = np.zeros(self.A.shape[0])
        e[j - self.n_real] = 1.0
        return e

    def refactor(self) -> None:
        B = np.column_stack([self.column(j) for j in self.basis])
        self.Binv = np.linalg.inv(B)
        self.xB = self.Binv @ self.b
        self.xB[np.abs(self.xB) < self.tol] = 0.0
        self._since_refactor = 0

    def pivot(self, r: int, j: int, d: np.ndarray) -> None:
        t = self.xB[r] / d[r]
        self.xB -= t * d
        self.xB[r] = t
        np.maximum(self.xB, 0.0, out=self.xB)
        row = self.Binv[r] / d[r]
        self.Binv -= np.outer(d, row)
        self.Binv[r] = row
        self.basis[r] = j
        self.iterations += 1
        self._since_refactor += 1
        if self._since_refactor >= _REFACTOR_EVERY:
            self.refactor()

    def _reduced(self, cost: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.pricer is not None:
            yc = self.pricer(y)
            return cost[: self.n_real] - np.concatenate([yc, -yc])
        return cost[: self.n_real] - y @ self.A

    def run(self, cost: np.ndarray, max_iter: int) -> None:
        """Iterate until no reduced cost is below ``-tol``; ``cost`` covers real columns only.

        Pricing is Dantzig's (most negative reduced cost).  After
        ``_DEGENERATE_LIMIT`` consecutive degenerate pivots the method switches
        to Bland's rule, which cannot cycle, until the objective moves again.
        """
        m = self.A.shape[0]
        full_cost = np.concatenate([cost, np.zeros(m)]) if cost.shape[0] == self.n_real else cost
        degenerate = 0
        blocked = np.zeros(self.n_real, dtype=bool)
        retried = False
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError(f"simplex did not terminate within {max_iter} pivots")
            bland = degenerate >= _DEGENERATE_LIMIT
            y = full_cost[self.basis] @ self.Binv
            reduced = self._reduced(cost, y)
            reduced[self.basis[self.basis < self.n_real]] = 0.0
            reduced[blocked] = 0.0
            if bland:
                candidates = np.flatnonzero(reduced < -self.tol)
                if candidates.size == 0:
                    return
                j = int(candidates[0])
            else:
                j = int(np.argmin(reduced))
                if reduced[j] >= -self.tol:
                    return
            d = self.Binv @ self.A[:, j]
            pos = d > self.tol
            if not np.any(pos):
                if reduced[j] > -_NOISE * (1.0 + float(np.max(np.abs(y)))):
                    blocked[j] = True
                    continue
                if not retried:
                    self.refactor()
                    retried = True
                    continue
                raise UnboundedLP("objective is unbounded below")
            ratios = np.full(m, np.inf)
            ratios[pos] = self.xB[pos] / d[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + self.tol * max(1.0, best))
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                # the largest pivot element keeps the basis well conditioned
                r = int(ties[np.argmax(d[ties])])
            if best <= self.tol:
                degenerate += 1
            else:
                degenerate = 0
                blocked[:] = False
                retried = False
            self.pivot(r, j, d)


def simplex(c, A, b, tol: float = 1e-9, max_iter: int | None = None, basis=None, _pricer=None) -> LPResult:
    """Minimize ``c @ x`` subject to ``A @ x = b`` and ``x >= 0``.

    ``basis`` optionally lists ``len(b)`` column indices forming a primal
    feasible starting basis; phase 1 is then skipped.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    flip = np.where(b < 0, -1.0, 1.0)
    A *= flip[:, None]
    b *= flip
    # _pricer(v) must return v @ C for A = [C, -C] before the row flip
    pricer = None if _pricer is None else (lambda y: _pricer(y * flip))
    if max_iter is None:
        max_iter = 50 * (m + n)

    tab = _Tableau(A, b, tol, basis=basis, pricer=pricer)
    if basis is None:
        # phase 1: minimise the sum of artificials
        phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
        tab.pricer = None
        tab.run(phase1_cost, max_iter)
        tab.pricer = pricer
        scale = max(1.0, float(np.max(np.abs(b))))
        if float(np.sum(tab.xB[tab.basis >= n])) > 1e-7 * scale:
            raise InfeasibleLP("no feasible point")

        # drive zero-level artificials out of the basis where possible
        for r in range(m):
            if tab.basis[r] < n:
                continue
            row = tab.Binv[r] @ A
            row[tab.basis[tab.basis < n]] = 0.0
            nz = np.flatnonzero(np.abs(row) > 1e-7)
            if nz.size:
                j = int(nz[0])
                tab.pivot(r, j, tab.Binv @ A[:, j])

    # phase 2; artificials left in the basis (redundant rows) sit at zero with zero cost
    tab.run(c, max_iter)
    tab.refactor()
    x = np.zeros(n)
    real = tab.basis < n
    x[tab.basis[real]] = tab.xB[real]
    full_cost = np.concatenate([c, np.zeros(m)])
    duals = (full_cost[tab.basis] @ tab.Binv) * flip
    return LPResult(x=x, objective=float(c @ x), duals=duals, iterations=tab.iterations)


def min_l1_decomposition(columns, target, tol: float = 1e-9, start=None, pricer=None) -> LPResult:
    """Minimise ``sum |lam|`` subject to ``columns @ lam = target``.

    Free coefficients are split as ``lam = p - q`` with ``p, q >= 0``.  The
    returned ``x`` is ``lam`` itself and ``duals`` is a vector ``y`` with
    ``|columns.T @ y| <= 1`` and ``y @ target`` equal to the optimum.

    ``start`` optionally names ``len(target)`` columns forming a nonsingular
    square matrix; solving against it gives a feasible first basis.
    ``pricer(v)`` optionally computes ``v @ columns`` faster than a dense
    product, for structured column sets.
    """
    columns = np.asarray(columns, dtype=float)
    target = np.asarray(target, dtype=float)
    N = columns.shape[1]
    basis = None
    if start is not None:
        start = np.asarray(start, dtype=int)
        lam0 = np.linalg.solve(columns[:, start], target)
        basis = np.where(lam0 >= 0, start, start + N)
    res = simplex(np.ones(2 * N), np.hstack([columns, -columns]), target, tol=tol, basis=basis,
                  _pricer=pricer if pricer is not None else (lambda v: v @ columns))
    lam = res.x[:N] - res.x[N:]
    return LPResult(x=lam, objective=res.objective, duals=res.duals, iterations=res.iterations)
