"""Simple-fold diagnostics from the SVD of G_u and bounds on sigma_min(F_x).

F_x is the bordered Jacobian of the extended system,

    F_x = [[G_u,    G_lam],
           [udot^T, lamdot]],

whose bottom row is the unit tangent used in the normalization equation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bounds import main_bound_value
from .linalg import PreconditionError, as_matrix, as_vector, singular_values, svd

FOLD_THRESHOLD = 1e-6
TANGENT_TOL = 1e-10
TANGENT_RENORM_TOL = 1e-6

CSV_COLUMNS = ("s", "lambda", "sigma_N", "sigma_Nminus1", "gap", "proj", "xi",
               "alpha", "tau", "bound", "actual")


class TangentNormError(PreconditionError):
    pass


@dataclass(frozen=True)
class FoldDiagnostics:
    sigma_N: float
    sigma_Nminus1: float
    gap: float
    proj: float
    xi: float
    alpha: float
    tau: float
    sigma_min_Fx_bound: float | None
    sigma_min_Fx_actual: float
    is_simple_fold_candidate: bool
    bound_status: str = "valid"
    # tau * max(1/alpha, 1); the bordered perturbation is a contraction when < 1
    e_norm_bound: float = math.nan
    # sqrt(min(alpha, 1) - tau), valid whenever tau < min(alpha, 1)
    sigma_min_Fx_bound_weyl: float | None = None
    fx_norm: float = math.nan

    def to_row(self, s: float, lam: float) -> list:
        return [s, lam, self.sigma_N, self.sigma_Nminus1, self.gap, self.proj, self.xi,
                self.alpha, self.tau, self.sigma_min_Fx_bound, self.sigma_min_Fx_actual]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BorderedJacobian:
    G_u: np.ndarray
    G_lambda: np.ndarray
    tangent: np.ndarray
    assembled: np.ndarray


def _check_tangent(tangent, n):
    tangent = as_vector(tangent)
    if tangent.size != n + 1:
        raise PreconditionError(f"tangent has length {tangent.size}, expected {n + 1}")
    norm = float(np.linalg.norm(tangent))
    if abs(norm - 1.0) > TANGENT_RENORM_TOL:
        raise TangentNormError(f"tangent norm {norm!r} is not 1")
    if abs(norm - 1.0) > TANGENT_TOL:
        tangent = tangent / norm
    return tangent


def _check_blocks(G_u, G_lambda):
    G_u = as_matrix(G_u)
    n = G_u.shape[0]
    if G_u.shape != (n, n):
        raise PreconditionError("G_u must be square")
    G_lambda = as_vector(G_lambda)
    if G_lambda.size != n:
        raise PreconditionError("G_lambda length does not match G_u")
    return G_u, G_lambda


def assemble_bordered(G_u, G_lambda, tangent) -> BorderedJacobian:
    G_u, G_lambda = _check_blocks(G_u, G_lambda)
    n = G_u.shape[0]
    tangent = _check_tangent(tangent, n)
    F = np.empty((n + 1, n + 1))
    F[:n, :n] = G_u
    F[:n, n] = G_lambda
    F[n, :] = tangent
    return BorderedJacobian(G_u=G_u, G_lambda=G_lambda, tangent=tangent, assembled=F)


def sigma_min_actual(B: BorderedJacobian) -> float:
    return float(singular_values(B.assembled)[-1])


def bound_status(alpha: float, tau: float) -> str:
    if not alpha > 0.0:
        return "alpha vanished"
    if tau >= alpha and tau >= 1.0:
        return "tau >= min(alpha, 1): tau >= alpha and tau >= 1"
    if tau >= alpha:
        return "tau >= min(alpha, 1): tau >= alpha"
    if tau >= 1.0:
        return "tau >= min(alpha, 1): tau >= 1"
    return "valid"


def sigma_min_bound_value(alpha: float, tau: float) -> float | None:
    """sqrt(1 - tau * max(1/alpha, 1)) if tau < min(alpha, 1), else None."""
    if bound_status(alpha, tau) != "valid":
        return None
    return math.sqrt(1.0 - tau * max(1.0 / alpha, 1.0))


def sigma_min_bound_weyl(alpha: float, tau: float) -> float | None:
    """sqrt(min(alpha, 1) - tau) under the same hypothesis.

    Follows from F_x F_x^T = diag(G_u G_u^T + G_lam G_lam^T, 1) + [[0, r], [r^T, 0]]
    and Weyl's inequality. Coincides with ``sigma_min_bound_value`` when
    alpha >= 1 and stays valid when alpha < 1, where the other one can
    overshoot sigma_min(F_x).
    """
    if bound_status(alpha, tau) != "valid":
        return None
    return math.sqrt(min(alpha, 1.0) - tau)


def sigma_min_bound(diag: FoldDiagnostics) -> float | None:
    return sigma_min_bound_value(diag.alpha, diag.tau)


def classify_point(G_u, G_lambda, tangent, *, fold_threshold: float = FOLD_THRESHOLD) -> FoldDiagnostics:
    """Fold diagnostics at one path point from a single SVD of G_u.

    For N = 1 there is no sigma_{N-1}; gap is reported as +inf and alpha
    reduces to max(sigma_1^2, proj^2).
    """
    B = assemble_bordered(G_u, G_lambda, tangent)
    G_u, G_lambda, tangent = B.G_u, B.G_lambda, B.tangent
    n = G_u.shape[0]
    f = svd(G_u)
    sig = f.singular_values
    sigma_N = float(sig[-1])
    sigma_Nm1 = float(sig[-2]) if n > 1 else math.inf
    gap = sigma_Nm1 ** 2 - sigma_N ** 2 if n > 1 else math.inf
    u_N = f.U[:, -1]
    proj = float(u_N @ G_lambda)
    xi = abs(proj) + float(np.linalg.norm(G_lambda - proj * u_N))
    alpha = main_bound_value(sigma_N ** 2, proj, gap, xi)
    tau = float(np.linalg.norm(G_u @ tangent[:n] + G_lambda * tangent[n]))

    status = bound_status(alpha, tau)
    e_bound = tau * max(1.0 / alpha, 1.0) if alpha > 0 else math.inf
    gl_norm = float(np.linalg.norm(G_lambda))
    candidate = bool(sigma_N <= fold_threshold * float(sig[0]) and abs(proj) > fold_threshold * gl_norm)
    fx_sv = singular_values(B.assembled)
    return FoldDiagnostics(
        sigma_N=sigma_N,
        sigma_Nminus1=sigma_Nm1,
        gap=gap,
        proj=proj,
        xi=xi,
        alpha=alpha,
        tau=tau,
        sigma_min_Fx_bound=sigma_min_bound_value(alpha, tau),
        sigma_min_Fx_actual=float(fx_sv[-1]),
        is_simple_fold_candidate=candidate,
        bound_status=status,
        e_norm_bound=e_bound,
        sigma_min_Fx_bound_weyl=sigma_min_bound_weyl(alpha, tau),
        fx_norm=float(fx_sv[0]),
    )


def max_step_bound(gamma_x: float, gamma_F: float, inv_norm: float) -> float:
    """Largest arclength step for which Newton is guaranteed to converge locally."""
    if not (gamma_x > 0 and gamma_F > 0 and inv_norm > 0):
        raise PreconditionError("max_step_bound needs positive inputs")
    return 1.0 / (2.0 * gamma_x * gamma_F * inv_norm)
