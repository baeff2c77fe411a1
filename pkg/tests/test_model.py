import numpy as np
import pytest
from hypothesis import given, strategies as st

from aqua import Criterion, Design, DesignProblem, from_regressors, i_to_a, info_matrix, moment_matrix, phi
from aqua.errors import DimensionMismatch, EmptyRegion, NotPsd, SingularL
from aqua.model import transform_matrix, uniform_moment
from conftest import random_spd


@given(st.integers(1, 20), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_from_regressors(n, m, seed):
    F = np.random.default_rng(seed).standard_normal((n, m))
    P = from_regressors(F)
    for i in range(n):
        assert np.linalg.matrix_rank(P.elem[i], tol=1e-10) <= 1
        assert np.isclose(np.trace(P.elem[i]), F[i] @ F[i])


def test_info_matrix(rng):
    F = rng.standard_normal((7, 3))
    P = from_regressors(F)
    w = rng.integers(0, 4, 7).astype(float)
    assert np.allclose(info_matrix(P, w), F.T @ (w[:, None] * F))
    assert np.allclose(info_matrix(P, Design(w)), F.T @ (w[:, None] * F))
    with pytest.raises(DimensionMismatch):
        info_matrix(P, np.ones(6))


def test_design_validation():
    with pytest.raises(ValueError):
        Design([1.0, -1.0])
    with pytest.raises(ValueError):
        Design([0.5, 1.0], integral=True)
    d = Design([0.0, 2.0, 1.0], integral=True)
    assert d.size == 3 and d.support.tolist() == [1, 2]


def test_elementary_matrices_checked():
    with pytest.raises(NotPsd):
        DesignProblem(elem=[np.diag([1.0, -1.0])])
    with pytest.raises(DimensionMismatch):
        DesignProblem(elem=np.zeros((2, 2, 3)))


def test_i_to_a_exact(rng):
    """tr of the inverse transformed matrix equals tr(M^-1 L)."""
    for _ in range(20):
        m = int(rng.integers(1, 5))
        F = rng.standard_normal((12, m))
        P = from_regressors(F)
        L = random_spd(rng, m)
        w = rng.uniform(0.1, 2.0, 12)
        M = info_matrix(P, w)
        Mt = info_matrix(i_to_a(P, L), w)
        assert np.allclose(Mt, transform_matrix(M, L))
        lhs = np.trace(np.linalg.inv(Mt))
        rhs = np.trace(np.linalg.solve(M, L))
        assert abs(lhs - rhs) <= 1e-9 * abs(rhs)
        assert np.isclose(phi(Criterion("I", L=L), M), m * phi(Criterion("negative", 1), Mt), rtol=1e-9)


def test_moment_matrix():
    V = [np.eye(2), np.diag([1.0, 3.0])]
    assert np.allclose(moment_matrix(V, [0.5, 0.5]), np.diag([1.0, 2.0]))
    with pytest.raises(EmptyRegion):
        moment_matrix(V, [0.0, 0.0])
    with pytest.raises(ValueError):
        moment_matrix(V, [1.0, -1.0])
    P = from_regressors([[1.0, 0.0], [1.0, 1.0]])
    assert np.allclose(uniform_moment(P), np.array([[1.0, 0.5], [0.5, 0.5]]))
    with pytest.raises(SingularL):
        i_to_a(P, np.diag([1.0, 0.0]))
