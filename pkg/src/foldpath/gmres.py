"""Full (unrestarted) GMRES with per-iteration residual history."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import PreconditionError, as_vector

REORTH_TOL = 1e-8


@dataclass(frozen=True)
class LinearOperator:
    dimension: int
    apply: Callable[[np.ndarray], np.ndarray]

    def __call__(self, v):
        return self.apply(v)

    @classmethod
    def from_matrix(cls, A) -> "LinearOperator":
        A = np.asarray(A, dtype=float)
        return cls(A.shape[0], lambda v: A @ v)


def aslinearoperator(op) -> LinearOperator:
    if isinstance(op, LinearOperator):
        return op
    return LinearOperator.from_matrix(op)


@dataclass
class GmresTrace:
    residual_norms: list[float]
    iterations: int
    converged: bool
    solution: np.ndarray
    orthogonality_loss: float = field(default=0.0)

    def to_rows(self):
        return [(k, r) for k, r in enumerate(self.residual_norms)]


class GmresError(RuntimeError):
    def __init__(self, message, trace: GmresTrace):
        super().__init__(message)
        self.trace = trace


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0
    h = math.hypot(a, b)
    return a / h, b / h


def gmres_solve(op, b, x0=None, rel_tol: float = 1e-10, max_iter: int | None = None) -> GmresTrace:
    """Minimize ||b - A x|| over x0 + K_k(A, r0) for k = 1, 2, ...

    Modified Gram-Schmidt, with a second pass whenever the new basis vector
    keeps a component above ``REORTH_TOL`` along the earlier ones. The Hessenberg
    least-squares problem is reduced by Givens rotations as it grows, so
    ``residual_norms[k]`` is the exact (in exact arithmetic) GMRES residual
    after k iterations; entry 0 is ||r0||.
    """
    op = aslinearoperator(op)
    n = op.dimension
    b = as_vector(b)
    if b.size != n:
        raise PreconditionError("rhs length does not match operator dimension")
    x0 = np.zeros(n) if x0 is None else as_vector(x0).copy()
    if not 0.0 < rel_tol < 1.0:
        raise PreconditionError("rel_tol must lie in (0, 1)")
    max_iter = n if max_iter is None else int(max_iter)
    if max_iter > n or max_iter < 0:
        raise PreconditionError("max_iter must be between 0 and the dimension")

    r0 = b - op(x0)
    beta = float(np.linalg.norm(r0))
    history = [beta]
    if beta == 0.0:
        return GmresTrace(history, 0, True, x0)

    V = np.zeros((max_iter + 1, n))
    H = np.zeros((max_iter + 1, max_iter))
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter)
    g = np.zeros(max_iter + 1)
    g[0] = beta
    V[0] = r0 / beta
    target = rel_tol * beta
    converged = False
    k = 0
    for j in range(max_iter):
        w = np.asarray(op(V[j]), dtype=float)
        wnorm0 = float(np.linalg.norm(w))
        for i in range(j + 1):
            h = float(V[i] @ w)
            H[i, j] = h
            w -= h * V[i]
        wnorm = float(np.linalg.norm(w))
        if wnorm > 0.0 and np.max(np.abs(V[:j + 1] @ w)) > REORTH_TOL * wnorm:
            for i in range(j + 1):
                h = float(V[i] @ w)
                H[i, j] += h
                w -= h * V[i]
            wnorm = float(np.linalg.norm(w))
        H[j + 1, j] = wnorm
        for i in range(j):
            a, c = H[i, j], H[i + 1, j]
            H[i, j] = cs[i] * a + sn[i] * c
            H[i + 1, j] = -sn[i] * a + cs[i] * c
        cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
        H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]
        k = j + 1
        breakdown = wnorm <= 1e-14 * max(wnorm0, 1e-300)
        history.append(abs(float(g[j + 1])))
        if history[-1] <= target or breakdown:
            converged = True
            break
        V[j + 1] = w / wnorm

    if k:
        R = H[:k, :k]
        y = np.zeros(k)
        for i in range(k - 1, -1, -1):
            y[i] = (g[i] - R[i, i + 1:k] @ y[i + 1:k]) / R[i, i] if R[i, i] != 0.0 else 0.0
        x = x0 + V[:k].T @ y
    else:
        x = x0
    Q = V[:k]
    loss = float(np.max(np.abs(Q @ Q.T - np.eye(k)))) if k else 0.0
    return GmresTrace(history, k, converged, x, loss)
