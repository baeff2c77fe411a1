"""Polyhedral sets of permissible designs and the LP vertex oracle."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, Infeasible
from .simplex import BoundedSimplex, FEAS_TOL, HighsLP

# above this many rows the LP oracle is delegated to HiGHS
DENSE_ROW_LIMIT = 120


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """``{xi : A xi <= b (rows flagged eq: A xi = b), lower <= xi <= upper}``.

    ``integer`` flags variables that must be integral in exact designs.
    Construction checks that the continuous relaxation is non-empty unless
    ``validate=False``.
    """

    A: np.ndarray
    b: np.ndarray
    eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    integer: np.ndarray | None = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float, ndmin=2)
        b = np.array(self.b, dtype=float).ravel()
        if A.shape[0] != b.size:
            if A.size == 0 and b.size == 0:
                A = A.reshape(0, A.shape[-1] if A.ndim == 2 else 0)
            else:
                raise DimensionMismatch(f"A has {A.shape[0]} rows but b has {b.size} entries")
        n = A.shape[1]
        eq = np.zeros(b.size, dtype=bool) if self.eq is None else np.array(self.eq, dtype=bool).ravel()
        lower = np.zeros(n) if self.lower is None else np.broadcast_to(np.array(self.lower, dtype=float), (n,)).copy()
        upper = np.full(n, np.inf) if self.upper is None else np.broadcast_to(np.array(self.upper, dtype=float), (n,)).copy()
        integer = np.ones(n, dtype=bool) if self.integer is None else np.broadcast_to(np.array(self.integer, dtype=bool), (n,)).copy()
        if eq.size != b.size:
            raise DimensionMismatch("eq flags must match the number of rows")
        if np.any(lower > upper):
            raise Infeasible("some lower bound exceeds its upper bound")
        for name, val in (("A", A), ("b", b), ("eq", eq), ("lower", lower), ("upper", upper), ("integer", integer)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        if self.validate:
            self.check_feasible()

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def k(self):
        return self.A.shape[0]

    @classmethod
    def size(cls, n, N, upper=None, integer=True):
        """The classical set ``{1^T xi = N, xi >= 0}``."""
        return cls(A=np.ones((1, n)), b=[N], eq=[True], upper=upper, integer=integer)

    def check_feasible(self):
        """Raise ``Infeasible`` unless the continuous relaxation is non-empty."""
        s = self.solver()
        if s._knap:
            s.maximize(np.zeros(self.n))
        else:
            s.feasible_start()

    def solver(self, lower=None, upper=None):
        lo = self.lower if lower is None else lower
        hi = self.upper if upper is None else upper
        if self.k > DENSE_ROW_LIMIT:
            return HighsLP(self.A, self.b, self.eq, lo, hi)
        return BoundedSimplex(self.A, self.b, self.eq, lo, hi)

    def with_bounds(self, lower=None, upper=None):
        return ConstraintSet(
            A=self.A, b=self.b, eq=self.eq,
            lower=self.lower if lower is None else lower,
            upper=self.upper if upper is None else upper,
            integer=self.integer, validate=False,
        )

    def add_rows(self, A, b, eq=False, validate=True):
        A = np.array(A, dtype=float, ndmin=2)
        b = np.array(b, dtype=float).ravel()
        eqf = np.broadcast_to(np.array(eq, dtype=bool), b.shape)
        return ConstraintSet(
            A=np.vstack([self.A, A]), b=np.concatenate([self.b, b]),
            eq=np.concatenate([self.eq, eqf]), lower=self.lower, upper=self.upper,
            integer=self.integer, validate=validate,
        )

    def subset(self, idx):
        """Keep only the columns ``idx``; rows and right-hand sides are unchanged."""
        idx = np.asarray(idx)
        return ConstraintSet(
            A=self.A[:, idx], b=self.b, eq=self.eq, lower=self.lower[idx],
            upper=self.upper[idx], integer=self.integer[idx],
        )


def lp_max(c, C, relaxed=True):
    """Maximize ``c^T xi`` over the continuous relaxation of ``C``.

    Integrality is ignored (the oracle always works on the relaxation);
    ``relaxed`` exists for interface symmetry and must be true.
    """
    if not relaxed:
        raise NotImplementedError("integer maximization lives in aqua.integer")
    c = np.asarray(c, dtype=float)
    if c.shape != (C.n,):
        raise DimensionMismatch(f"objective has length {c.size}, expected {C.n}")
    return C.solver().maximize(c)


@dataclass
class FeasibilityReport:
    ok: bool
    violations: list

    def __bool__(self):
        return self.ok


def feasible(xi, C, tol=1e-8, integral=None):
    """Check a design against ``C``; ``integral`` defaults to the design's own flag."""
    from .model import Design

    if isinstance(xi, Design):
        w = xi.weights
        integral = xi.integral if integral is None else integral
    else:
        w = np.asarray(xi, dtype=float)
    if w.shape != (C.n,):
        raise DimensionMismatch(f"design has length {w.size}, expected {C.n}")
    out = []
    if C.k:
        lhs = C.A @ w
        scale = np.maximum(1.0, np.abs(C.b))
        viol_ub = lhs - C.b
        for i in np.flatnonzero(~C.eq & (viol_ub > tol * scale)):
            out.append(("row", int(i), float(viol_ub[i])))
        for i in np.flatnonzero(C.eq & (np.abs(viol_ub) > tol * scale)):
            out.append(("equality", int(i), float(viol_ub[i])))
    for i in np.flatnonzero(w < C.lower - tol):
        out.append(("lower", int(i), float(C.lower[i] - w[i])))
    for i in np.flatnonzero(w > C.upper + tol):
        out.append(("upper", int(i), float(w[i] - C.upper[i])))
    if integral:
        frac = np.abs(w - np.round(w))
        for i in np.flatnonzero(C.integer & (frac > 1e-9)):
            out.append(("integrality", int(i), float(frac[i])))
    return FeasibilityReport(ok=not out, violations=out)


def add_symmetry_orbits(C, orbits):
    """Add equality rows forcing equal weights inside every orbit."""
    rows = []
    for orb in orbits:
        orb = [int(i) for i in orb]
        if any(i < 0 or i >= C.n for i in orb):
            raise IndexOutOfRange(f"orbit {orb} has indices outside 0..{C.n - 1}")
        if len(set(orb)) != len(orb):
            raise IndexOutOfRange(f"orbit {orb} repeats an index")
        for a, b in zip(orb[:-1], orb[1:]):
            r = np.zeros(C.n)
            r[a], r[b] = 1.0, -1.0
            rows.append(r)
    if not rows:
        return C
    return C.add_rows(np.array(rows), np.zeros(len(rows)), eq=True)


def violation(C, w):
    """Total infeasibility of ``w`` measured in row units (bounds excluded)."""
    if not C.k:
        return 0.0
    r = C.A @ w - C.b
    return float(np.sum(np.where(C.eq, np.abs(r), np.maximum(r, 0.0))))


__all__ = [
    "ConstraintSet", "lp_max", "feasible", "FeasibilityReport", "add_symmetry_orbits",
    "violation", "FEAS_TOL",
]
