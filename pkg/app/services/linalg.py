"""
Rank, null space and solve kernels shared by the pointwise, global and
stratified constructions.

Float mode uses SVD with a tolerance relative to the largest singular value.
Exact mode works on sympy matrices with a zero test that falls back to
high-precision numerics for undecided algebraic entries.
"""

from typing import Optional

import numpy as np
import sympy as sp
from scipy import linalg

from app.core.scalars import is_zero


def exact_is_zero(expr) -> bool:
    return is_zero(sp.cancel(expr), "exact")


def _simplify(expr):
    return sp.cancel(sp.expand(expr))


def singular_values(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return np.zeros(0)
    return linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)


def float_rank(matrix: np.ndarray, tol: float, reference: Optional[float] = None) -> int:
    """Number of singular values >= tol * reference (default sigma_max)."""
    s = singular_values(matrix)
    if s.size == 0:
        return 0
    scale = s[0] if reference is None else reference
    if scale <= 0:
        return 0
    return int(np.sum(s >= tol * scale))


def exact_rref(matrix: sp.Matrix) -> tuple:
    return matrix.rref(iszerofunc=exact_is_zero, simplify=_simplify)


def exact_rank(matrix: sp.Matrix) -> int:
    if 0 in matrix.shape:
        return 0
    _, pivots = exact_rref(matrix)
    return len(pivots)


def float_null_space(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal columns spanning the null space (rank decided relative to sigma_max)."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.any(matrix):
        return np.eye(matrix.shape[1])
    return linalg.null_space(matrix, rcond=tol)


def exact_null_space(matrix: sp.Matrix) -> list:
    if matrix.shape[0] == 0:
        return [sp.Matrix.eye(matrix.shape[1])[:, j] for j in range(matrix.shape[1])]
    vectors = matrix.nullspace(simplify=_simplify, iszerofunc=exact_is_zero)
    return [v.applyfunc(sp.expand) for v in vectors]


def exact_solve(matrix: sp.Matrix, rhs: sp.Matrix) -> Optional[sp.Matrix]:
    """
    Particular solution of ``matrix @ x = rhs`` (free variables set to 0), or
    None when the system is inconsistent.
    """
    rows, cols = matrix.shape
    augmented = matrix.row_join(rhs)
    reduced, pivots = exact_rref(augmented)
    if cols in pivots:
        return None
    solution = sp.zeros(cols, 1)
    for row, pivot in enumerate(pivots):
        solution[pivot, 0] = sp.expand(sp.cancel(reduced[row, cols]))
    return solution


def float_solve(matrix: np.ndarray, rhs: np.ndarray) -> tuple:
    """Least-squares solution and max absolute residual."""
    matrix = np.asarray(matrix, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if matrix.shape[1] == 0:
        return np.zeros(0), float(np.max(np.abs(rhs), initial=0.0))
    solution, *_ = linalg.lstsq(matrix, rhs)
    residual = float(np.max(np.abs(matrix @ solution - rhs), initial=0.0))
    return solution, residual


def batched_singular_values(stack: np.ndarray) -> np.ndarray:
    """Singular values of every matrix in a (P, R, N) stack, descending."""
    if stack.shape[1] == 0 or stack.shape[2] == 0:
        return np.zeros((stack.shape[0], 0))
    return np.linalg.svd(stack, compute_uv=False)


def batched_rank(stack: np.ndarray, tol: float, reference: np.ndarray) -> np.ndarray:
    """Per-matrix rank with threshold tol * reference[p]; zero where reference is 0."""
    s = batched_singular_values(stack)
    if s.shape[1] == 0:
        return np.zeros(stack.shape[0], dtype=int)
    threshold = (tol * reference)[:, None]
    ranks = np.sum(s >= threshold, axis=1)
    return np.where(reference > 0, ranks, 0).astype(int)
