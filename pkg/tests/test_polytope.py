import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from aqua import ConstraintSet, add_symmetry_orbits, feasible, lp_max
from aqua.errors import DimensionMismatch, IndexOutOfRange, Infeasible, Unbounded
from aqua.simplex import BoundedSimplex


def random_lp(rng, n, k, eq_rows, box):
    A = rng.integers(-3, 4, size=(k, n)).astype(float)
    x0 = rng.uniform(0, 2, n)  # a feasible point
    b = A @ x0 + rng.uniform(0, 1, k)
    eq = np.zeros(k, dtype=bool)
    eq[:eq_rows] = True
    b[eq] = A[eq] @ x0
    upper = np.full(n, 3.0) if box else np.full(n, np.inf)
    return A, b, eq, upper


@given(st.integers(1, 12), st.integers(0, 6), st.integers(0, 2), st.booleans(), st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_simplex_matches_linprog(n, k, eq_rows, box, seed):
    rng = np.random.default_rng(seed)
    eq_rows = min(eq_rows, k)
    A, b, eq, upper = random_lp(rng, n, k, eq_rows, box)
    c = rng.standard_normal(n)
    ref = linprog(
        -c, A_ub=A[~eq] if (~eq).any() else None, b_ub=b[~eq] if (~eq).any() else None,
        A_eq=A[eq] if eq.any() else None, b_eq=b[eq] if eq.any() else None,
        bounds=[(0, None if np.isinf(u) else u) for u in upper], method="highs",
    )
    C = ConstraintSet(A=A.reshape(k, n), b=b, eq=eq, upper=upper, validate=False)
    if ref.status == 3:
        with pytest.raises(Unbounded):
            lp_max(c, C)
        return
    assert ref.status == 0
    x, val = lp_max(c, C)
    assert np.isclose(val, -ref.fun, rtol=1e-7, atol=1e-7)
    assert feasible(x, C, tol=1e-7)


def test_knapsack_path_matches_general_simplex(rng):
    for _ in range(50):
        n = int(rng.integers(1, 15))
        a = rng.uniform(0.5, 2.0, n)
        hi = np.where(rng.random(n) < 0.5, rng.uniform(0.5, 3, n), np.inf)
        lo = np.where(rng.random(n) < 0.3, rng.uniform(0, 0.4, n), 0.0)
        eq = bool(rng.random() < 0.5)
        rhs = float(a @ lo + rng.uniform(0.1, 4))
        if eq and np.all(np.isfinite(hi)):
            rhs = min(rhs, float(a @ hi))
        c = rng.standard_normal(n)
        fast = BoundedSimplex(a[None], [rhs], [eq], lo, hi)
        assert fast._knap
        slow = BoundedSimplex(np.vstack([a, np.zeros(n)]), [rhs, 1.0], [eq, False], lo, hi)
        assert not slow._knap
        x1, v1 = fast.maximize(c)
        x2, v2 = slow.maximize(c)
        assert np.isclose(v1, v2, rtol=1e-9, atol=1e-9)
        assert np.all(x1 >= lo - 1e-12) and np.all(x1 <= hi + 1e-12)


def test_infeasible_detected():
    with pytest.raises(Infeasible):
        ConstraintSet(A=[[1.0, 1.0]], b=[-1.0], eq=[True])
    with pytest.raises(Infeasible):
        ConstraintSet(A=[[1.0, 1.0]], b=[5.0], eq=[True], upper=[1.0, 1.0])
    with pytest.raises(Infeasible):
        ConstraintSet(A=[[1.0, 1.0], [1.0, -1.0]], b=[1.0, -2.0], eq=[True, False])
    with pytest.raises(Infeasible):
        ConstraintSet(A=np.zeros((0, 2)), b=[], lower=[1.0, 0.0], upper=[0.0, 1.0])


def test_feasibility_report():
    C = ConstraintSet.size(3, 2, upper=1.0)
    assert feasible([1.0, 1.0, 0.0], C)
    rep = feasible([2.0, 0.0, 0.0], C)
    assert not rep and rep.violations[0][0] == "upper"
    assert not feasible([0.5, 1.0, 0.5], C, integral=True)
    assert feasible([0.5, 1.0, 0.5], C)
    with pytest.raises(DimensionMismatch):
        feasible([1.0], C)


def test_symmetry_orbits():
    C = add_symmetry_orbits(ConstraintSet.size(4, 4), [[0, 1, 2]])
    x, _ = lp_max(np.array([1.0, 0.0, 0.0, 0.0]), C)
    assert np.allclose(x[:3], x[0])
    with pytest.raises(IndexOutOfRange):
        add_symmetry_orbits(C, [[0, 7]])
    with pytest.raises(IndexOutOfRange):
        add_symmetry_orbits(C, [[1, 1]])


def test_subset_and_bounds():
    C = ConstraintSet(A=[[1.0, 2.0, 3.0]], b=[4.0], upper=[1.0, 1.0, 1.0])
    S = C.subset([0, 2])
    assert S.n == 2 and np.array_equal(S.A, [[1.0, 3.0]])
    B = C.with_bounds(lower=np.array([1.0, 0.0, 0.0]))
    x, v = lp_max(np.array([0.0, 1.0, 1.0]), B)
    assert x[0] == 1.0 and np.isclose(v, 4.0 / 3.0)
