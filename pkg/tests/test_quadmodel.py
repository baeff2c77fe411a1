import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aqua import Criterion, build, exchange_delta, from_regressors, gamma_d, info_matrix, phi, phi_quad, q_entry
from aqua import symlin
from aqua.errors import DimensionMismatch, EmptyPoint
from aqua.model import uniform_moment
from conftest import random_spd


def surrogate_of_matrix(Q, M):
    x = symlin.vech(M)
    return Q.a * (Q.h_vech @ x - x @ Q.Q_vech @ x) + Q.c


@pytest.mark.parametrize("family,p,gamma", [
    ("positive", 0, 0), ("negative", 1, 0), ("blend", 2, 0.5), ("logdet", 0, 0),
])
def test_design_and_matrix_forms_agree(family, p, gamma, rng):
    c = Criterion(family, p, gamma=gamma)
    P = from_regressors(rng.standard_normal((9, 3)))
    Q = build(P, c, random_spd(rng, 3))
    for _ in range(5):
        w = rng.uniform(0, 2, 9)
        assert np.isclose(Q.value(w), surrogate_of_matrix(Q, info_matrix(P, w)), rtol=1e-10)


def test_exact_at_anchor(rng):
    P = from_regressors(rng.standard_normal((8, 3)))
    w = rng.uniform(0.5, 1.5, 8)
    M = info_matrix(P, w)
    for c in (Criterion("positive", 0), Criterion("negative", 2), Criterion("logdet"),
              Criterion("I", L=uniform_moment(P))):
        Q = build(P, c, M)
        assert np.isclose(Q.value(w), phi(c, M), rtol=1e-10)


def test_gamma_d_range_and_logdet_blend(rng):
    for _ in range(10):
        M = random_spd(rng, 4, cond=100) * rng.uniform(0.01, 100)
        g = gamma_d(M)
        assert -1 < g < 1
        # the blend at gamma_d has the same curvature shape as log det
        P = from_regressors(rng.standard_normal((6, 4)))
        Ql = build(P, Criterion("logdet"), M)
        Qb = build(P, Criterion("blend", 0, gamma=g), M)
        assert np.allclose(Ql.Q_vech, Qb.Q_vech, rtol=1e-8, atol=1e-12 * np.abs(Qb.Q_vech).max())


def test_one_parameter_d_has_no_quadratic_part():
    P = from_regressors(np.array([[1.0], [2.0], [0.5]]))
    Q = build(P, Criterion("positive", 0), np.array([[3.0]]))
    assert Q.t == 0


@given(st.integers(1, 4), st.integers(2, 12), st.integers(0, 3), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_low_rank_matches_oracle(m, n, p, seed):
    rng = np.random.default_rng(seed)
    P = from_regressors(rng.standard_normal((n, m)))
    fam = ("positive", "negative")[seed % 2]
    c = Criterion(fam, p)
    Ms = random_spd(rng, m)
    Q = build(P, c, Ms)
    Qfull = np.array([[q_entry(P, c, Ms, i, j) for j in range(n)] for i in range(n)])
    SS = Q.S @ Q.S.T
    assert np.allclose(SS, Qfull, rtol=1e-8, atol=1e-10 * max(1.0, np.abs(Qfull).max()))


def test_exchange_state(rng):
    P = from_regressors(rng.standard_normal((10, 3)))
    Q = build(P, Criterion("negative", 1), random_spd(rng, 3))
    xi = rng.integers(0, 3, 10).astype(float)
    st_ = Q.exchange_state(xi)
    for _ in range(200):
        k = int(rng.choice(np.flatnonzero(st_.xi)))
        l = int(rng.integers(10))
        before = phi_quad(Q, st_.xi)
        d, st_ = exchange_delta(st_, l, k)
        assert np.isclose(phi_quad(Q, st_.xi) - before, d, rtol=1e-10, atol=1e-10)
    assert np.isclose(st_.value, phi_quad(Q, st_.xi))
    empty = int(np.flatnonzero(st_.xi == 0)[0]) if np.any(st_.xi == 0) else None
    if empty is not None:
        with pytest.raises(EmptyPoint):
            st_.apply(0 if empty else 1, empty)


def test_dimension_checks(rng):
    P = from_regressors(rng.standard_normal((5, 2)))
    with pytest.raises(DimensionMismatch):
        build(P, Criterion(), np.eye(3))
    Q = build(P, Criterion(), np.eye(2))
    with pytest.raises(DimensionMismatch):
        Q.phi(np.ones(4))
