import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aqua import symlin
from aqua.errors import DimensionMismatch, NotPsd, SingularMatrix
from conftest import random_spd


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_vech_roundtrip(m, seed):
    A = np.random.default_rng(seed).standard_normal((m, m))
    S = A + A.T
    assert np.array_equal(symlin.unvech(symlin.vech(S)), S)
    assert symlin.vech(S).size == symlin.vech_size(m)


def test_vech_order():
    M = np.array([[1.0, 2, 3], [2, 4, 5], [3, 5, 6]])
    assert symlin.vech(M).tolist() == [1, 2, 3, 4, 5, 6]


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_duplication_matrix(m, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, m))
    S = A + A.T
    G = symlin.duplication_matrix(m)
    assert np.allclose(G @ symlin.vech(S), symlin.vec(S))
    assert set(np.unique(G)) <= {0.0, 1.0}


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_trace_vech(m, seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((2, m, m))
    A, B = A + A.T, B + B.T
    assert np.isclose(symlin.trace_vech(A) @ symlin.vech(B), np.trace(A @ B))


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_kron_sandwich_matches_explicit(m, seed):
    rng = np.random.default_rng(seed)
    A, B = random_spd(rng, m), random_spd(rng, m)
    G = symlin.duplication_matrix(m)
    ref = G.T @ np.kron(A, B) @ G
    assert np.allclose(symlin.kron_sandwich(A, B), ref, atol=1e-10 * np.abs(ref).max())
    # quadratic form of M -> tr(B M A M)
    X = rng.standard_normal((m, m))
    X = X + X.T
    x = symlin.vech(X)
    assert np.isclose(x @ symlin.kron_sandwich(A, B) @ x, np.trace(B @ X @ A @ X))


def test_neg_powers(rng):
    M = random_spd(rng, 4)
    p1, p2, p3 = symlin.neg_powers(M, 3)
    Minv = np.linalg.inv(M)
    assert np.allclose(p1, Minv)
    assert np.allclose(p2, Minv @ Minv)
    assert np.allclose(p3, Minv @ Minv @ Minv)
    with pytest.raises(SingularMatrix):
        symlin.neg_powers(np.diag([1.0, 0.0]), 1)


def test_as_sym_rejects_rectangular():
    with pytest.raises(DimensionMismatch):
        symlin.as_sym(np.zeros((2, 3)))


@given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_psd_factor(m, r, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((m, min(r, m)))
    Q = B @ B.T
    f = symlin.psd_factor(Q)
    assert f.rank <= min(r, m)
    assert np.allclose(f.C @ f.C.T, Q, atol=1e-9 * max(1.0, np.abs(Q).max()))


def test_psd_factor_rejects_indefinite():
    with pytest.raises(NotPsd):
        symlin.psd_factor(np.diag([1.0, -0.5]))
