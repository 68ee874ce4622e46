"""This module provides small numerical linear algebra helpers."""
from typing import List, Tuple

import numpy as np
import scipy.linalg

RANK_RTOL = 1e-9
PINV_RTOL = 1e-10


def as_matrix(value, rows: int = -1, cols: int = -1) -> np.ndarray:
    """Returns a 2-D float array.

    A scalar or a flat list is promoted to a matrix. An empty value becomes an
    array of shape (`rows`, 0) when `rows` is given.

    Examples:
        >>> as_matrix([1, 2]).shape
        (1, 2)
        >>> as_matrix([[1], [2]]).shape
        (2, 1)
        >>> as_matrix([], rows=3).shape
        (3, 0)
        >>> as_matrix(None, rows=2, cols=0).shape
        (2, 0)
    """
    if value is None or (isinstance(value, (list, tuple)) and len(value) == 0):
        return np.zeros((max(rows, 0), max(cols, 0)))
    matrix = np.atleast_2d(np.asarray(value, dtype=float))
    if matrix.ndim != 2:
        raise ValueError(f"expected a matrix, got an array of shape {matrix.shape}")
    return matrix


def sym(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2


def numerical_rank(matrix: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Returns the number of singular values above `rtol` times the largest.

    Examples:
        >>> numerical_rank(np.eye(3))
        3
        >>> numerical_rank(np.zeros((2, 2)))
        0
        >>> numerical_rank(np.zeros((3, 0)))
        0
        >>> numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]]))
        1
    """
    if matrix.size == 0:
        return 0
    singular_values = np.linalg.svd(matrix, compute_uv=False)
    if singular_values[0] == 0:
        return 0
    return int(np.sum(singular_values > rtol * singular_values[0]))


def has_full_column_rank(matrix: np.ndarray, rtol: float = RANK_RTOL) -> bool:
    return numerical_rank(matrix, rtol) == matrix.shape[1]


def pinv(matrix: np.ndarray, rtol: float = PINV_RTOL) -> np.ndarray:
    """Returns the SVD based Moore-Penrose inverse.

    Singular values below `rtol` times the largest one are treated as zero.

    Examples:
        >>> np.allclose(pinv(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))
        True
        >>> pinv(np.zeros((2, 3))).shape
        (3, 2)
    """
    if matrix.size == 0:
        return np.zeros(matrix.shape[::-1])
    u, s, vh = scipy.linalg.svd(matrix, full_matrices=False)
    if s[0] == 0:
        return np.zeros(matrix.shape[::-1])
    inverse = np.where(s > rtol * s[0], 1 / np.where(s == 0, 1, s), 0.0)
    return (vh.T * inverse) @ u.T


def pbh_detectability(
    A: np.ndarray, C: np.ndarray, rtol: float = RANK_RTOL, stable_margin: float = 1e-12
) -> Tuple[bool, List[Tuple[complex, int]]]:
    """Tests detectability of (A, C) with the Popov-Belevitch-Hautus rank test.

    Every eigenvalue with real part above `-stable_margin` must keep
    `[sI - A; C]` at full column rank.

    Returns:
        A tuple of the verdict and the list of (eigenvalue, rank) pairs for the
        eigenvalues that were tested.

    Examples:
        >>> A = np.array([[1.0, 0.0], [0.0, -1.0]])
        >>> pbh_detectability(A, np.array([[1.0, 0.0]]))[0]
        True
        >>> pbh_detectability(A, np.array([[0.0, 1.0]]))[0]
        False
    """
    n = A.shape[0]
    tested = []
    passed = True
    for eigenvalue in np.linalg.eigvals(A):
        if eigenvalue.real < -stable_margin:
            continue
        pencil = np.vstack([eigenvalue * np.eye(n) - A, C.astype(complex)])
        rank = numerical_rank(pencil, rtol)
        tested.append((complex(eigenvalue), rank))
        if rank < n:
            passed = False
    return passed, tested


def max_eigenvalue(matrix: np.ndarray) -> float:
    """Returns the largest eigenvalue of the symmetric part of `matrix`."""
    if matrix.size == 0:
        return -np.inf
    return float(np.linalg.eigvalsh(sym(matrix))[-1])


def min_eigenvalue(matrix: np.ndarray) -> float:
    if matrix.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(sym(matrix))[0])


def spectral_abscissa(matrix: np.ndarray) -> float:
    """Returns the largest real part among the eigenvalues of `matrix`."""
    return float(np.max(np.linalg.eigvals(matrix).real))
