import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpsgame.errors import SingularSystemError
from dpsgame.linalg import gauss_solve


@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_matches_numpy_on_diagonally_dominant(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=n)
    np.testing.assert_allclose(gauss_solve(a, b), np.linalg.solve(a, b), rtol=1e-12, atol=1e-12)


def test_needs_pivoting():
    a = np.array([[0.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(gauss_solve(a, np.array([2.0, 3.0])), [1.0, 2.0])


def test_matrix_right_hand_side():
    a = np.array([[4.0, 1.0], [2.0, 3.0]])
    b = np.eye(2)
    np.testing.assert_allclose(gauss_solve(a, b), np.linalg.inv(a), rtol=1e-14)


def test_inputs_untouched():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    b = np.array([1.0, 1.0])
    a0, b0 = a.copy(), b.copy()
    gauss_solve(a, b)
    np.testing.assert_array_equal(a, a0)
    np.testing.assert_array_equal(b, b0)


def test_singular_raises():
    with pytest.raises(SingularSystemError):
        gauss_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))
