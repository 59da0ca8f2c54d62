"""Parameterized nonlinear systems G(u, lam) = 0.

The flagship is the Chandrasekhar H-equation discretized by the composite
midpoint rule on N nodes:

    G_i(H, c) = H_i - 1 / L_i,
    L_i = 1 - (c / 2N) sum_j mu_i H_j / (mu_i + mu_j),   mu_i = (i - 1/2) / N.
"""
from __future__ import annotations

import math

import numpy as np

from .gmres import LinearOperator
from .linalg import as_vector

DENOM_TOL = 1e-12


class DomainError(ValueError):
    """The iterate left the region where the residual is defined."""


class ProblemDef:
    """Base class: subclasses provide residual, jacobian and lambda_derivative."""

    problem_id = "problem"
    dimension: int

    def residual(self, u, lam) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, u, lam) -> np.ndarray:
        raise NotImplementedError

    def lambda_derivative(self, u, lam) -> np.ndarray:
        raise NotImplementedError

    def functional(self, u) -> float:
        return float(np.mean(u))

    # x = (u, lam) stacked, as used by the continuation drivers
    def G(self, x):
        return self.residual(x[:-1], x[-1])

    def G_x(self, x):
        u, lam = x[:-1], x[-1]
        return np.column_stack([self.jacobian(u, lam), self.lambda_derivative(u, lam)])

    def describe(self) -> dict:
        return {"problem_id": self.problem_id, "dimension": self.dimension}


class HEquation(ProblemDef):
    problem_id = "heq"

    def __init__(self, nodes: int):
        if nodes < 1:
            raise ValueError("need at least one node")
        self.dimension = int(nodes)
        n = self.dimension
        self.mu = (np.arange(1, n + 1) - 0.5) / n
        self.weight = 1.0 / n
        self.kernel = self.mu[:, None] / (self.mu[:, None] + self.mu[None, :])
        self.kernel.setflags(write=False)

    def describe(self):
        return {"problem_id": self.problem_id, "dimension": self.dimension,
                "quadrature": "composite midpoint"}

    def _sums(self, H):
        # S_i = (1/2N) sum_j mu_i H_j / (mu_i + mu_j)
        return (0.5 * self.weight) * (self.kernel @ H)

    def _denominators(self, H, c):
        H = as_vector(H)
        if H.size != self.dimension:
            raise ValueError(f"expected {self.dimension} unknowns, got {H.size}")
        S = self._sums(H)
        L = 1.0 - c * S
        if np.any(np.abs(L) < DENOM_TOL):
            raise DomainError("quadrature denominator 1 - c S_i vanished")
        return H, S, L

    def residual(self, H, c):
        H, _, L = self._denominators(H, c)
        return H - 1.0 / L

    def jacobian(self, H, c):
        _, _, L = self._denominators(H, c)
        J = -(0.5 * self.weight * c) * self.kernel / (L * L)[:, None]
        J[np.diag_indices_from(J)] += 1.0
        return J

    def lambda_derivative(self, H, c):
        _, S, L = self._denominators(H, c)
        return -S / (L * L)

    def functional(self, H):
        # midpoint quadrature of int_0^1 H
        return float(self.weight * np.sum(H))

    def null_vector(self, H):
        """mu_i H_i; annihilated by the Jacobian at the c = 1 solution."""
        return self.mu * as_vector(H)

    def initial_point(self):
        return np.ones(self.dimension), 0.0


def heq_norm_closed_form(c: float, branch: str = "lower") -> float:
    """||H||_1 = (1 -/+ sqrt(1 - c)) / (c / 2) on the lower/upper branch."""
    if c == 0.0:
        return 1.0 if branch == "lower" else math.inf
    root = math.sqrt(max(1.0 - c, 0.0))
    if branch == "lower":
        # (1 - r) * 2 / c rewritten as 2 / (1 + r) to avoid cancellation
        return 2.0 / (1.0 + root)
    return (1.0 + root) / (0.5 * c)


class ToyFold(ProblemDef):
    """G(u, lam) = u^2 + lam - 1; branches u = +-sqrt(1 - lam), fold at (0, 1)."""

    problem_id = "toy-fold"
    dimension = 1

    def residual(self, u, lam):
        u = as_vector(u)
        return u * u + lam - 1.0

    def jacobian(self, u, lam):
        return np.array([[2.0 * float(as_vector(u)[0])]])

    def lambda_derivative(self, u, lam):
        return np.array([1.0])

    def functional(self, u):
        return float(as_vector(u)[0])

    def initial_point(self):
        return np.array([1.0]), 0.0


class LinearProblem(ProblemDef):
    """G(u, lam) = u - lam (componentwise); no folds."""

    problem_id = "linear"

    def __init__(self, dimension: int = 1):
        self.dimension = int(dimension)

    def residual(self, u, lam):
        return as_vector(u) - lam

    def jacobian(self, u, lam):
        return np.eye(self.dimension)

    def lambda_derivative(self, u, lam):
        return -np.ones(self.dimension)

    def initial_point(self):
        return np.zeros(self.dimension), 0.0


def toy_fold_problem() -> ToyFold:
    return ToyFold()


def make_problem(name: str, nodes: int = 200) -> ProblemDef:
    if name in ("heq", "h-equation"):
        return HEquation(nodes)
    if name == "toy-fold":
        return ToyFold()
    if name == "linear":
        return LinearProblem(1)
    raise ValueError(f"unknown problem {name!r}")


def synthetic_cluster_operator(dimension: int, p: int, eps: float, seed=None):
    """Operator I + K + E with rank(K) = p and ||E||_2 = eps.

    K = Q T Q^T with Q an orthonormal N x p frame and T upper triangular with
    diagonal in [0.5, 2], so the nonunit eigenvalues of I + K lie in
    [1.5, 3]. E is Gaussian, rescaled to spectral norm eps.
    Returns (operator, K, E).
    """
    if not 0 <= p < dimension:
        raise ValueError("need 0 <= p < dimension")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    rng = np.random.default_rng(seed)
    n = dimension
    if p:
        Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
        T = np.triu(0.5 * rng.standard_normal((p, p)), 1)
        T[np.diag_indices(p)] = rng.uniform(0.5, 2.0, p)
        K = Q @ T @ Q.T
    else:
        K = np.zeros((n, n))
    E = rng.standard_normal((n, n))
    E *= eps / np.linalg.norm(E, 2)
    A = np.eye(n) + K + E
    return LinearOperator(n, lambda v: A @ v), K, E
