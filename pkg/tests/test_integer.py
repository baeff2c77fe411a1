import itertools

import numpy as np
import pytest

from aqua import (BnbOptions, ConstraintSet, Criterion, KlOptions, branch_and_bound, build, feasible,
                  from_regressors, kl_exchange, round_incumbent)
from aqua.errors import InfeasibleStart, ResourceExhausted
from conftest import random_spd


def exhaustive(Q, C, N):
    best, arg = -np.inf, None
    for combo in itertools.combinations_with_replacement(range(C.n), N):
        w = np.bincount(combo, minlength=C.n).astype(float)
        if feasible(w, C, integral=True):
            v = Q.phi(w)
            if v > best:
                best, arg = v, w
    return best, arg


def tiny_instance(rng, binary=False):
    n = int(rng.integers(3, 7))
    m = int(rng.integers(1, 4))
    N = int(rng.integers(max(m, 1), 5))
    if binary:
        N = min(N, n)
    P = from_regressors(rng.standard_normal((n, m)))
    fam = ("positive", "negative", "logdet")[int(rng.integers(3))]
    c = Criterion(fam, int(rng.integers(0, 3)))
    Q = build(P, c, random_spd(rng, m) * N / m)
    C = ConstraintSet.size(n, N, upper=1.0 if binary else None)
    return Q, C, N


def test_round_incumbent_example():
    C = ConstraintSet.size(3, 7)
    d = round_incumbent([2.6, 2.6, 1.8], C)
    assert d.weights.tolist() == [3.0, 2.0, 2.0]
    assert d.integral


def test_round_incumbent_feasible(rng):
    for _ in range(50):
        n = int(rng.integers(2, 10))
        N = int(rng.integers(1, 15))
        C = ConstraintSet.size(n, N, upper=np.ceil(N / n) + 1)
        x = rng.dirichlet(np.ones(n)) * N
        x = np.minimum(x, C.upper)
        x *= N / x.sum()
        d = round_incumbent(x, C)
        assert d is not None and feasible(d, C, integral=True)


def test_kl_exchange_reaches_local_optimum(rng):
    for _ in range(10):
        Q, C, N = tiny_instance(rng)
        start = np.zeros(C.n)
        start[0] = N
        trace = []
        d = kl_exchange(Q, C, start, KlOptions(K=C.n, L=C.n), trace=trace)
        assert feasible(d, C, integral=True)
        assert all(b > a for a, b in zip(trace, trace[1:]))
        w = d.weights
        for k in np.flatnonzero(w):
            for l in range(C.n):
                v = w.copy()
                v[k] -= 1
                v[l] += 1
                assert Q.phi(v) <= Q.phi(w) + 1e-9


def test_kl_rejects_infeasible_start(rng):
    Q, C, N = tiny_instance(rng)
    with pytest.raises(InfeasibleStart):
        kl_exchange(Q, C, np.zeros(C.n))


def test_branch_and_bound_matches_enumeration(rng):
    for i in range(15):
        Q, C, N = tiny_instance(rng, binary=i % 5 == 0)
        rep = branch_and_bound(Q, C)
        best, _ = exhaustive(Q, C, N)
        assert rep.termination in ("optimal", "gap_reached")
        assert np.isclose(rep.value, best, rtol=1e-7, atol=1e-9)
        assert rep.upper_bound >= best - 1e-9
        assert feasible(rep.design, C, integral=True)


def test_linear_surrogate_is_greedy():
    # one parameter, D criterion: the quadratic part vanishes and the best point takes all trials
    P = from_regressors(np.array([[1.0], [3.0], [2.0]]))
    Q = build(P, Criterion("positive", 0), np.array([[4.0]]))
    assert Q.t == 0
    rep = branch_and_bound(Q, ConstraintSet.size(3, 5))
    assert rep.design.weights.tolist() == [0.0, 5.0, 0.0]


def test_caps(rng):
    n, m = 30, 4
    P = from_regressors(rng.standard_normal((n, m)))
    Q = build(P, Criterion("negative", 1), random_spd(rng, m) * 3)
    C = ConstraintSet.size(n, 12)
    rep = branch_and_bound(Q, C, BnbOptions(node_cap=1, dive_every=0))
    assert rep.termination in ("node_cap", "optimal", "gap_reached")
    assert rep.upper_bound >= rep.value
    if rep.termination == "node_cap":
        with pytest.raises(ResourceExhausted):
            branch_and_bound(Q, C, BnbOptions(node_cap=1, dive_every=0, raise_on_cap=True))
