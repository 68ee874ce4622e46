import numpy as np
import pytest

from fauio.core import linalg


def test_as_matrix():
    assert linalg.as_matrix(2.0).shape == (1, 1)
    assert linalg.as_matrix(None, rows=3).shape == (3, 0)
    with pytest.raises(ValueError):
        linalg.as_matrix(np.zeros((2, 2, 2)))


def test_numerical_rank_against_svd():
    rng = np.random.default_rng(1)
    for rank in range(4):
        matrix = rng.normal(size=(5, rank)) @ rng.normal(size=(rank, 4))
        assert linalg.numerical_rank(matrix) == rank
        assert linalg.has_full_column_rank(matrix) == (rank == 4)


def test_pinv_round_trip():
    rng = np.random.default_rng(2)
    matrix = rng.normal(size=(7, 5))
    inverse = linalg.pinv(matrix)
    assert np.abs(inverse @ matrix - np.eye(5)).max() <= 1e-10
    assert np.allclose(inverse, np.linalg.pinv(matrix))


def test_pbh_detectability_random_observable():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(3, 3))
    C = rng.normal(size=(1, 3))
    passed, tested = linalg.pbh_detectability(A, C)
    assert passed
    for eigenvalue, rank in tested:
        assert eigenvalue.real >= -1e-12
        assert rank == 3
    for s in rng.normal(size=20) + 1j * rng.normal(size=20):
        pencil = np.vstack([s * np.eye(3) - A, C])
        assert np.linalg.matrix_rank(pencil) == 3


def test_pbh_stable_mode_is_not_tested():
    A = np.diag([-1.0, 2.0])
    C = np.array([[0.0, 1.0]])
    passed, tested = linalg.pbh_detectability(A, C)
    assert passed
    assert len(tested) == 1


def test_eigenvalues():
    matrix = np.array([[1.0, 2.0], [0.0, 3.0]])
    assert linalg.spectral_abscissa(matrix) == 3.0
    assert np.isclose(linalg.max_eigenvalue(matrix), 2 + np.sqrt(2))
    assert np.isclose(linalg.min_eigenvalue(matrix), 2 - np.sqrt(2))
    assert linalg.max_eigenvalue(np.zeros((0, 0))) == -np.inf
