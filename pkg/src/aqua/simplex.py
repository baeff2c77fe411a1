"""Dense bounded-variable revised simplex.

Solves ``max c^T x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``lo <= x <= hi`` with finite ``lo``. Rows are few (tens) while columns may
be many, so the basis is re-solved densely at every pivot and pricing is a
single matrix-vector product. Pricing uses the largest reduced cost and
switches to Bland's rule after a run of degenerate pivots.
"""

import numpy as np

from .errors import Infeasible, Unbounded

FEAS_TOL = 1e-9
COST_TOL = 1e-10
PIVOT_TOL = 1e-11
DEGENERATE_RUN = 30


class LPState:
    """Basis and bound status that can warm-start a later solve."""

    __slots__ = ("basis", "at_upper")

    def __init__(self, basis, at_upper):
        self.basis = np.array(basis, dtype=int)
        self.at_upper = np.array(at_upper, dtype=bool)


class BoundedSimplex:
    """Reusable solver for one constraint matrix and one set of bounds."""

    def __init__(self, A, b, eq, lo, hi, max_iter=None):
        A = np.asarray(A, dtype=float)
        self.k, self.n = A.shape
        b = np.asarray(b, dtype=float)
        eq = np.asarray(eq, dtype=bool)
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if not np.all(np.isfinite(lo)):
            raise ValueError("lower bounds must be finite")
        if np.any(lo > hi):
            raise Infeasible("a lower bound exceeds its upper bound")
        k, n = self.k, self.n
        ub_rows = np.flatnonzero(~eq)
        self.n_slack = len(ub_rows)
        # columns: structural | slacks for <= rows | one artificial per row
        S = np.zeros((k, self.n_slack))
        S[ub_rows, np.arange(self.n_slack)] = 1.0
        self.A = np.hstack([A, S, np.eye(k)])
        self.b = b
        self.ntot = n + self.n_slack + k
        self.art0 = n + self.n_slack
        self.lo = np.concatenate([lo, np.zeros(self.n_slack), np.zeros(k)])
        self.hi = np.concatenate([hi, np.full(self.n_slack, np.inf), np.zeros(k)])
        self.scale = max(1.0, float(np.max(np.abs(b))) if k else 1.0)
        self.max_iter = max_iter or 50 * (k + 10) + 10 * n
        self.state = None
        self._last = None  # (basis, at_upper, x) of the previous solve
        self.iterations = 0
        # a single row with positive coefficients is a continuous knapsack
        self._knap = k == 1 and bool(np.all(A[0] > 0))
        self._a, self._lo, self._hi = A[0] if k else None, lo, hi

    # ------------------------------------------------------------------
    def _x_from_state(self, basis, at_upper):
        x = np.where(at_upper, self.hi, self.lo)
        x[basis] = 0.0
        if self.k:
            B = self.A[:, basis]
            rhs = self.b - self.A @ x
            x[basis] = np.linalg.solve(B, rhs)
        return x

    def _cold_start(self):
        k, n = self.k, self.n
        x = self.lo.copy()
        r = self.b - self.A[:, :n] @ x[:n]
        basis = np.empty(k, dtype=int)
        slack_of_row = np.full(k, -1)
        slack_of_row[np.flatnonzero(np.any(self.A[:, n:self.art0] != 0, axis=1))] = np.arange(self.n_slack)
        A = self.A
        for i in range(k):
            if slack_of_row[i] >= 0 and r[i] >= 0:
                basis[i] = n + slack_of_row[i]
                x[basis[i]] = r[i]
            else:
                j = self.art0 + i
                A[i, j] = 1.0 if r[i] >= 0 else -1.0
                basis[i] = j
                x[j] = abs(r[i])
        at_upper = np.zeros(self.ntot, dtype=bool)
        return basis, at_upper, x

    def _iterate(self, cost, basis, at_upper, x, lo, hi):
        """Primal simplex from a feasible basis. Returns (basis, at_upper, x)."""
        A = self.A
        k = self.k
        nonbasic = np.ones(self.ntot, dtype=bool)
        nonbasic[basis] = False
        fixed = hi <= lo
        bland = False
        degenerate = 0
        ctol = COST_TOL * max(1.0, float(np.max(np.abs(cost))))
        for it in range(self.max_iter):
            self.iterations += 1
            B = A[:, basis]
            y = np.linalg.solve(B.T, cost[basis]) if k else np.zeros(0)
            d = cost - A.T @ y
            up = nonbasic & ~fixed & ~at_upper & (d > ctol)
            down = nonbasic & ~fixed & at_upper & (d < -ctol)
            cand = up | down
            if not cand.any():
                return basis, at_upper, x
            if bland:
                j = int(np.flatnonzero(cand)[0])
            else:
                score = np.where(cand, np.abs(d), -1.0)
                j = int(np.argmax(score))
            sgn = 1.0 if up[j] else -1.0
            alpha = np.linalg.solve(B, A[:, j]) if k else np.zeros(0)
            delta = -sgn * alpha  # change of x_B per unit step of x_j in its direction
            xb = x[basis]
            theta = hi[j] - lo[j]
            leave = -1
            with np.errstate(divide="ignore", invalid="ignore"):
                dec = delta < -PIVOT_TOL
                inc = delta > PIVOT_TOL
                ratios = np.full(k, np.inf)
                ratios[dec] = (xb[dec] - lo[basis][dec]) / (-delta[dec])
                ratios[inc] = (hi[basis][inc] - xb[inc]) / delta[inc]
            ratios = np.maximum(ratios, 0.0)
            if k:
                rmin = ratios.min()
                if rmin < theta:
                    ties = np.flatnonzero(ratios <= rmin + 1e-12 * max(1.0, rmin))
                    if bland:
                        leave = int(ties[np.argmin(basis[ties])])
                    else:
                        leave = int(ties[np.argmax(np.abs(delta[ties]))])
                    theta = ratios[leave]
            if not np.isfinite(theta):
                ray = np.zeros(self.ntot)
                ray[j] = sgn
                ray[basis] = delta
                raise Unbounded("objective is unbounded on the feasible region", ray=ray[: self.n])
            x[j] += sgn * theta
            x[basis] = xb + delta * theta
            if leave < 0:
                at_upper[j] = not at_upper[j]
                x[j] = hi[j] if at_upper[j] else lo[j]
            else:
                out = basis[leave]
                hit_upper = delta[leave] > 0
                x[out] = hi[out] if hit_upper else lo[out]
                at_upper[out] = bool(hit_upper) and np.isfinite(hi[out])
                at_upper[j] = False
                nonbasic[out] = True
                nonbasic[j] = False
                basis[leave] = j
            if theta <= 1e-12:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
                bland = False
            if it % 50 == 49:
                x = self._refresh(basis, x)
        raise RuntimeError("simplex iteration limit reached")

    def _refresh(self, basis, x):
        if not self.k:
            return x
        xn = x.copy()
        xn[basis] = 0.0
        xn[basis] = np.linalg.solve(self.A[:, basis], self.b - self.A @ xn)
        return xn

    def _phase1(self):
        basis, at_upper, x = self._cold_start()
        cost = np.zeros(self.ntot)
        cost[self.art0:] = -1.0
        hi1 = self.hi.copy()
        hi1[self.art0:] = np.inf
        basis, at_upper, x = self._iterate(cost, basis, at_upper, x, self.lo, hi1)
        infeas = float(np.sum(x[self.art0:]))
        if infeas > FEAS_TOL * self.scale * max(1, self.k):
            raise Infeasible(f"constraints are infeasible (phase-1 residual {infeas:.3g})")
        x[self.art0:] = 0.0
        at_upper[self.art0:] = False
        return basis, at_upper, self._refresh(basis, x)

    def _warm(self, state):
        basis = state.basis.copy()
        at_upper = state.at_upper.copy() & np.isfinite(self.hi)
        at_upper[basis] = False
        try:
            x = self._x_from_state(basis, at_upper)
        except np.linalg.LinAlgError:
            return None
        tol = FEAS_TOL * self.scale
        xb = x[basis]
        if np.any(xb < self.lo[basis] - tol) or np.any(xb > self.hi[basis] + tol):
            return None
        x[basis] = np.clip(xb, self.lo[basis], self.hi[basis])
        return basis, at_upper, x

    def feasible_start(self, warm=None):
        start = self._warm(warm) if warm is not None else None
        if start is None and self._last is not None:
            start = tuple(a.copy() for a in self._last)
        if start is None and self.state is not None:
            start = self._warm(self.state)
        if start is None:
            start = self._phase1()
            self.state = LPState(start[0], start[1])
        return start

    def _knapsack(self, c):
        """Greedy by value per unit of the row; exact for one positive row."""
        a, lo, hi = self._a, self._lo, self._hi
        x = lo.copy()
        rest = self.b[0] - a @ lo
        tol = FEAS_TOL * self.scale
        if rest < -tol:
            raise Infeasible("constraints are infeasible (lower bounds exceed the row)")
        eq = self.n_slack == 0
        order = np.lexsort((np.arange(self.n), -c / a))
        for i in order:
            if rest <= 0 or (not eq and c[i] <= 0):
                break
            take = min(hi[i] - lo[i], rest / a[i])
            x[i] += take
            rest -= take * a[i]
        if eq and rest > tol:
            raise Infeasible("constraints are infeasible (upper bounds too small for the row)")
        return x, float(c @ x)

    def maximize(self, c, warm=None):
        """Return ``(x, value)`` at an optimal vertex."""
        c = np.asarray(c, dtype=float)
        if self._knap:
            return self._knapsack(c)
        cost = np.zeros(self.ntot)
        cost[: self.n] = c
        basis, at_upper, x = self.feasible_start(warm)
        basis, at_upper, x = self._iterate(cost, basis, at_upper, x, self.lo, self.hi)
        self.state = LPState(basis, at_upper)
        self._last = (basis, at_upper, x)
        xs = x[: self.n].copy()
        # snap nonbasic structurals exactly onto their bounds
        nb = np.ones(self.ntot, dtype=bool)
        nb[basis] = False
        nbs = nb[: self.n]
        xs[nbs] = np.where(at_upper[: self.n][nbs], self.hi[: self.n][nbs], self.lo[: self.n][nbs])
        xs = np.clip(xs, self.lo[: self.n], self.hi[: self.n])  # basic values within tolerance
        return xs, float(c @ xs)


class HighsLP:
    """The ``BoundedSimplex`` interface on top of HiGHS, for constraint sets with many rows.

    The dense simplex re-solves its basis at every pivot, which is slow once
    there are hundreds of rows (for example many symmetry equalities).
    """

    _knap = False

    def __init__(self, A, b, eq, lo, hi):
        from scipy import sparse

        A = sparse.csr_matrix(np.asarray(A, dtype=float))
        eq = np.asarray(eq, dtype=bool)
        b = np.asarray(b, dtype=float)
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(lo > hi):
            raise Infeasible("a lower bound exceeds its upper bound")
        self.n = A.shape[1]
        self._ub = (A[~eq], b[~eq]) if (~eq).any() else (None, None)
        self._eq = (A[eq], b[eq]) if eq.any() else (None, None)
        self._bounds = np.column_stack([lo, hi])
        self.state = None
        self.iterations = 0

    def maximize(self, c, warm=None):
        from scipy.optimize import linprog

        c = np.asarray(c, dtype=float)
        res = linprog(-c, A_ub=self._ub[0], b_ub=self._ub[1], A_eq=self._eq[0], b_eq=self._eq[1],
                      bounds=self._bounds, method="highs")
        self.iterations += int(getattr(res, "nit", 0) or 0)
        if res.status == 2:
            raise Infeasible("constraints are infeasible")
        if res.status == 3:
            raise Unbounded("objective is unbounded on the feasible region")
        if res.status != 0:
            raise RuntimeError(f"HiGHS failed: {res.message}")
        x = np.clip(res.x, self._bounds[:, 0], self._bounds[:, 1])
        return x, float(c @ x)

    def feasible_start(self, warm=None):
        return self.maximize(np.zeros(self.n))
