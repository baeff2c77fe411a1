import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aqua import Criterion, efficiency, phi, phi_gradient
from aqua.criteria import phi_plus_equivalent
from aqua.errors import SingularMatrix, UndefinedEfficiency
from conftest import random_spd

seeds = st.integers(0, 2**32 - 1)


def direct_positive(M, p):
    m = len(M)
    if p == 0:
        return np.linalg.det(M) ** (1 / m)
    return (np.trace(np.linalg.matrix_power(np.linalg.inv(M), p)) / m) ** (-1 / p)


@given(st.integers(1, 5), st.integers(0, 3), seeds)
def test_values_against_direct_formula(m, p, seed):
    M = random_spd(np.random.default_rng(seed), m)
    plus = direct_positive(M, p)
    assert np.isclose(phi(Criterion("positive", p), M), plus, rtol=1e-10)
    assert np.isclose(phi(Criterion("negative", p), M), -1 / plus, rtol=1e-10)
    assert np.isclose(phi(Criterion("logdet"), M), np.log(np.linalg.det(M)), rtol=1e-10, atol=1e-12)
    g = 0.3
    blend = 0.65 * plus - 0.35 / plus
    assert np.isclose(phi(Criterion("blend", p, gamma=g), M), blend, rtol=1e-10)


def test_singular_values():
    M = np.diag([1.0, 0.0])
    assert phi(Criterion("positive", 0), M) == 0.0
    assert phi(Criterion("negative", 1), M) == -np.inf
    assert phi(Criterion("logdet"), M) == -np.inf
    with pytest.raises(SingularMatrix):
        phi_gradient(Criterion("positive", 0), M)


@pytest.mark.parametrize("family,p,gamma", [
    ("positive", 0, 0), ("negative", 0, 0), ("positive", 1, 0), ("negative", 2, 0),
    ("positive", 3, 0), ("blend", 1, -0.5), ("logdet", 0, 0),
])
def test_gradient_finite_differences(family, p, gamma, rng):
    c = Criterion(family, p, gamma=gamma)
    M = random_spd(rng, 4)
    G = phi_gradient(c, M)
    for _ in range(5):
        E = rng.standard_normal((4, 4))
        E = E + E.T
        eps = 1e-6
        fd = (phi(c, M + eps * E) - phi(c, M - eps * E)) / (2 * eps)
        assert np.isclose(np.sum(G * E), fd, rtol=1e-6, atol=1e-9)


def test_i_gradient(rng):
    L = random_spd(rng, 3)
    c = Criterion("I", L=L)
    M = random_spd(rng, 3)
    assert np.isclose(phi(c, M), -np.trace(np.linalg.solve(M, L)))
    E = rng.standard_normal((3, 3))
    E = E + E.T
    fd = (phi(c, M + 1e-6 * E) - phi(c, M - 1e-6 * E)) / 2e-6
    assert np.isclose(np.sum(phi_gradient(c, M) * E), fd, rtol=1e-6)


@given(st.integers(2, 5), st.integers(0, 3), seeds)
@settings(max_examples=50)
def test_versions_induce_same_order(m, p, seed):
    rng = np.random.default_rng(seed)
    M1, M2 = random_spd(rng, m), random_spd(rng, m)
    d_plus = phi(Criterion("positive", p), M1) - phi(Criterion("positive", p), M2)
    d_minus = phi(Criterion("negative", p), M1) - phi(Criterion("negative", p), M2)
    assert np.sign(d_plus) == np.sign(d_minus)


@given(st.integers(1, 5), st.integers(0, 3), st.floats(0.1, 10), seeds)
def test_efficiency_homogeneous(m, p, scale, seed):
    M = random_spd(np.random.default_rng(seed), m)
    for fam in ("positive", "negative", "blend"):
        assert np.isclose(efficiency(Criterion(fam, p, gamma=0.2), scale * M, M), scale, rtol=1e-9)
    assert np.isclose(efficiency(Criterion("logdet"), scale * M, M), scale, rtol=1e-9)


def test_efficiency_undefined():
    with pytest.raises(UndefinedEfficiency):
        efficiency(Criterion(), np.eye(2), np.diag([1.0, 0.0]))
    assert phi_plus_equivalent(Criterion(), np.diag([1.0, 0.0])) == 0.0


def test_invalid_criteria():
    with pytest.raises(ValueError):
        Criterion("bogus")
    with pytest.raises(ValueError):
        Criterion(p=-1)
    with pytest.raises(ValueError):
        Criterion("blend", gamma=2.0)
    with pytest.raises(ValueError):
        Criterion("I", L=np.diag([1.0, 0.0]))
