import numpy as np
import pytest
from hypothesis import given, strategies as st

from aqua import efficient_rounding
from aqua.errors import BadParams, TooFewTrials


def test_examples():
    assert efficient_rounding([0.5, 0.3, 0.2], 10).tolist() == [5, 3, 2]
    assert efficient_rounding(np.ones(10), 10).tolist() == [1] * 10
    assert efficient_rounding(np.ones(4), 12).tolist() == [3] * 4


@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=40), st.integers(0, 200))
def test_invariants(w, extra):
    N = len(w) + extra
    n = efficient_rounding(w, N)
    assert n.sum() == N
    assert n.min() >= 1


def test_errors():
    with pytest.raises(TooFewTrials):
        efficient_rounding(np.ones(5), 4)
    with pytest.raises(BadParams):
        efficient_rounding([0.5, 0.0], 4)
    with pytest.raises(BadParams):
        efficient_rounding([], 4)
