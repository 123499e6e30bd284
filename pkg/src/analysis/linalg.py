"""Small dense determinants and Cramer solves."""

import warnings
from typing import List, Sequence

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgWarning


def lu_determinant(matrix: np.ndarray) -> float:
    """Determinant from an LU factorisation with partial pivoting."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("Matrix must be square")
    if a.shape[0] == 0:
        return 1.0
    with warnings.catch_warnings():
        # exactly singular input is a legitimate zero determinant here
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    swaps = int(np.count_nonzero(piv != np.arange(piv.shape[0])))
    sign = -1.0 if swaps % 2 else 1.0
    return float(sign * np.prod(np.diag(lu)))


def cofactor_determinant(matrix: Sequence[Sequence[float]] | np.ndarray) -> float:
    """Laplace expansion along the first row; exponential cost, small matrices only."""
    a = np.asarray(matrix, dtype=np.float64)
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return float(a[0, 0])
    if n == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    total = 0.0
    for col in range(n):
        minor = np.delete(a[1:], col, axis=1)
        total += (-1) ** col * a[0, col] * cofactor_determinant(minor)
    return float(total)


def column_norm_product(matrix: np.ndarray) -> np.ndarray | float:
    """Product of column 2-norms; works on a single matrix or a stack ``(..., K, K)``."""
    norms = np.prod(np.linalg.norm(np.asarray(matrix, dtype=np.float64), axis=-2), axis=-1)
    return float(norms) if np.ndim(norms) == 0 else norms


def cramer_solve(matrix: np.ndarray, rhs: np.ndarray, determinant: float | None = None) -> List[float]:
    """Solve ``matrix @ x = rhs`` by Cramer's rule with LU determinants.

    ``x_c = det(matrix with column c replaced by rhs) / det(matrix)``.
    """
    a = np.asarray(matrix, dtype=np.float64)
    b = np.asarray(rhs, dtype=np.float64)
    if b.shape != (a.shape[0],):
        raise ValueError("Right-hand side dimension mismatch")
    det = lu_determinant(a) if determinant is None else determinant
    if det == 0:
        raise ZeroDivisionError("singular matrix")
    solution = []
    for col in range(a.shape[1]):
        replaced = a.copy()
        replaced[:, col] = b
        solution.append(lu_determinant(replaced) / det)
    return solution


def batched_determinants(stack: np.ndarray) -> np.ndarray:
    """Determinants of a stack ``(T, K, K)`` (LAPACK LU with partial pivoting)."""
    return np.linalg.det(np.asarray(stack, dtype=np.float64))


def batched_cramer_numerators(stack: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Cramer numerators for every system in a stack; result shape ``(T, K)``."""
    a = np.asarray(stack, dtype=np.float64)
    size = a.shape[-1]
    numerators = np.empty(a.shape[:-1])
    for col in range(size):
        replaced = a.copy()
        replaced[..., :, col] = rhs
        numerators[..., col] = np.linalg.det(replaced)
    return numerators
