"""Dense factorizations used throughout the package.

Thin wrappers over LAPACK (through numpy/scipy) that enforce ordering
conventions and raise package-specific errors.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

EPS = np.finfo(float).eps


class LinalgError(Exception):
    pass


class FactorizationError(LinalgError):
    """The underlying LAPACK iteration failed to converge."""


class PreconditionError(LinalgError, ValueError):
    pass


class SingularMatrixError(LinalgError):
    def __init__(self, pivot_index: int, pivot: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(f"numerically singular pivot {pivot:.3e} at index {pivot_index}")


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise PreconditionError(f"expected a nonempty 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise PreconditionError("matrix has non-finite entries")
    return A


def as_vector(b) -> np.ndarray:
    b = np.asarray(b, dtype=float).ravel()
    if not np.all(np.isfinite(b)):
        raise PreconditionError("vector has non-finite entries")
    return b


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class SymEigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def svd(A) -> SvdResult:
    """Full SVD, singular values in non-increasing order.

    ``A = U @ diag(s) @ V.T`` for square input; for rectangular input U and V
    are the full orthogonal factors.
    """
    A = as_matrix(A)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(str(exc)) from exc
    return SvdResult(U=U, singular_values=s, V=Vt.T)


def singular_values(A) -> np.ndarray:
    A = as_matrix(A)
    try:
        return np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(str(exc)) from exc


def symmetrize(A, tol: float = 1e-12) -> np.ndarray:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise PreconditionError("symmetric input must be square")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > tol * scale:
        raise PreconditionError("matrix is not symmetric within tolerance")
    return 0.5 * (A + A.T)


def sym_eig(A) -> SymEigResult:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    A = symmetrize(A)
    try:
        w, Q = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(str(exc)) from exc
    return SymEigResult(eigenvalues=w[::-1].copy(), eigenvectors=Q[:, ::-1].copy())


def lu_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises SingularMatrixError when a pivot satisfies
    ``|pivot| <= N * eps * max|A_ij|``.
    """
    A = as_matrix(A)
    b = as_vector(b)
    n = A.shape[0]
    if A.shape[1] != n:
        raise PreconditionError("lu_solve needs a square matrix")
    if b.size != n:
        raise PreconditionError(f"rhs length {b.size} does not match {n}")
    with warnings.catch_warnings():
        # exact zero pivots are reported below with their index
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    threshold = n * EPS * float(np.max(np.abs(A)))
    bad = np.flatnonzero(pivots <= threshold)
    if bad.size:
        k = int(bad[0])
        raise SingularMatrixError(k, float(np.diag(lu)[k]))
    return sla.lu_solve((lu, piv), b, check_finite=False)


def lstsq(A, b) -> np.ndarray:
    A = as_matrix(A)
    b = as_vector(b)
    return np.linalg.lstsq(A, b, rcond=None)[0]
