"""Lower bounds for the smallest eigenvalue of a PSD rank-one update A + y y^T."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import PreconditionError, as_vector, sym_eig

PSD_TOL = 1e-10
REPEATED_TOL = 1e-12


@dataclass(frozen=True)
class RankOneBoundReport:
    beta_N: float
    beta_Nminus1: float
    y_N: float
    gap: float
    xi: float
    bound_main: float
    bound_helper: float
    weyl_low: float
    weyl_high: float
    repeated_smallest: bool = False


def _spectrum(A):
    eig = sym_eig(A)
    beta = eig.eigenvalues
    scale = max(float(np.max(np.abs(beta))), 0.0)
    if beta[-1] < -PSD_TOL * max(scale, 1e-300):
        raise PreconditionError(f"matrix is indefinite: smallest eigenvalue {beta[-1]:.3e}")
    beta = np.clip(beta, 0.0, None)
    return beta, eig.eigenvectors, scale


def main_bound_value(beta_N: float, y_N: float, gap: float, xi: float) -> float:
    """max(beta_N, y_N^2 gap / (gap + xi^2)); gap may be +inf."""
    if math.isinf(gap):
        ratio = 1.0
    elif gap + xi * xi == 0.0:
        ratio = 0.0
    else:
        ratio = gap / (gap + xi * xi)
    return max(beta_N, y_N * y_N * ratio)


def helper_bound_value(beta_N: float, beta_Nm1: float, y_N: float, gap: float, xi: float) -> float:
    if xi <= 0.0:
        raise PreconditionError("xi vanished; y must be nonzero")
    if math.isinf(gap):
        return beta_N + y_N * y_N
    denom = gap + xi * xi
    return min(beta_N + y_N * y_N * gap / denom, beta_Nm1 * y_N * y_N / (xi * xi))


def rank_one_lower_bound(A, y) -> RankOneBoundReport:
    """Evaluate both lower bounds and the Weyl interval for lambda_min(A + y y^T).

    A must be symmetric positive semidefinite (eigenvalues down to
    ``-1e-10 * ||A||`` are clamped to zero) and y nonzero. The eigenvector of
    the smallest eigenvalue is the last column returned by the eigensolver;
    when that eigenvalue is repeated the report flags it and the bound falls
    back toward the Weyl floor.
    """
    y = as_vector(y)
    if not np.any(y):
        raise PreconditionError("y must be nonzero")
    beta, Q, scale = _spectrum(A)
    if y.size != beta.size:
        raise PreconditionError("dimension mismatch between A and y")
    n = beta.size
    beta_N = float(beta[-1])
    beta_Nm1 = float(beta[-2]) if n > 1 else math.inf
    y_N = float(Q[:, -1] @ y)
    ynorm2 = float(y @ y)
    rest = math.sqrt(max(ynorm2 - y_N * y_N, 0.0))
    xi = abs(y_N) + rest
    gap = beta_Nm1 - beta_N
    return RankOneBoundReport(
        beta_N=beta_N,
        beta_Nminus1=beta_Nm1,
        y_N=y_N,
        gap=gap,
        xi=xi,
        bound_main=main_bound_value(beta_N, y_N, gap, xi),
        bound_helper=helper_bound_value(beta_N, beta_Nm1, y_N, gap, xi),
        weyl_low=beta_N,
        weyl_high=beta_Nm1,
        repeated_smallest=bool(n > 1 and gap < REPEATED_TOL * max(scale, 1e-300)),
    )


def rank_one_helper_bound(A, y) -> float:
    return rank_one_lower_bound(A, y).bound_helper


def weyl_interval(A, y=None) -> tuple[float, float]:
    """(beta_N, beta_{N-1}); the upper end is +inf when N = 1."""
    beta = sym_eig(A).eigenvalues
    if beta.size == 1:
        return float(beta[0]), math.inf
    return float(beta[-1]), float(beta[-2])
