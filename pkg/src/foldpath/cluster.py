"""Identity + low rank + small splittings and the GMRES residual envelope.

For J = I + K + E with rank(K) = p, GMRES residuals should satisfy

    ||r_{p_hat + k}|| <= C ||E||^k ||r_0||

once p_hat iterations have removed the outlying eigenvalues. Bordering J
into the (N+1) x (N+1) continuation Jacobian raises the rank of the
low-rank term by at most two.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fold import assemble_bordered
from .gmres import aslinearoperator, gmres_solve
from .linalg import PreconditionError, as_matrix, as_vector, singular_values, svd

DEFAULT_EPS = 1e-3
RANK_TOL = 1e-10
# residuals below this fraction of ||r0|| are at rounding level and carry no envelope information
ENVELOPE_FLOOR = 1e-13


class InsufficientDataError(ValueError):
    pass


@dataclass
class SplittingReport:
    p: int
    E_norm: float
    K_singular_values: list[float]
    bordered_rank_bound: int
    observed_gmres_plateau: int | None = None
    jbound_C_fit: float | None = None
    eps: float = DEFAULT_EPS
    threshold: float = 0.0
    bordered_numeric_rank: int | None = None
    bordered_residual_norm: float | None = None
    K: np.ndarray | None = field(default=None, repr=False)
    E: np.ndarray | None = field(default=None, repr=False)
    bordered_K: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("K", "E", "bordered_K"):
            d.pop(key)
        return d


def _split(J, eps):
    J = as_matrix(J)
    n = J.shape[0]
    if J.shape != (n, n):
        raise PreconditionError("J must be square")
    f = svd(J - np.eye(n))
    s = f.singular_values
    threshold = eps * max(1.0, float(s[0]))
    p = int(np.count_nonzero(s > threshold))
    K = (f.U[:, :p] * s[:p]) @ f.V[:, :p].T
    E = (J - np.eye(n)) - K
    E_norm = float(s[p]) if p < n else 0.0
    return p, K, E, E_norm, s, threshold


def split_low_rank(J, eps: float = DEFAULT_EPS) -> SplittingReport:
    """Split J - I into its rank-p truncated SVD K plus remainder E.

    p counts singular values of J - I above ``eps * max(1, sigma_1(J - I))``,
    so ||E||_2 = sigma_{p+1}(J - I). The floor of 1 is the scale of the
    identity term; without it a pure remainder (p = 0) would be promoted to
    outliers.
    """
    p, K, E, E_norm, s, threshold = _split(J, eps)
    return SplittingReport(
        p=p, E_norm=E_norm, K_singular_values=[float(v) for v in s[:p]],
        bordered_rank_bound=p + 2, eps=eps, threshold=threshold, K=K, E=E,
    )


def numeric_rank(A, rel_tol: float = RANK_TOL) -> int:
    s = singular_values(A)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def bordered_splitting(J, G_lambda, tangent, eps: float = DEFAULT_EPS) -> SplittingReport:
    """Splitting of the bordered Jacobian F_x = I + calK + diag(E, 0).

    calK = [[K, G_lam], [udot^T, lamdot - 1]]; the -1 keeps the identity on
    the bottom-right entry of F_x. Its range sits inside
    Range(K) x {0} + span{(G_lam, 0)} + span{e_{N+1}}, hence rank <= p + 2.
    """
    rep = split_low_rank(J, eps)
    B = assemble_bordered(J, G_lambda, tangent)
    n = B.G_u.shape[0]
    calK = np.empty((n + 1, n + 1))
    calK[:n, :n] = rep.K
    calK[:n, n] = B.G_lambda
    calK[n, :n] = B.tangent[:n]
    calK[n, n] = B.tangent[n] - 1.0
    remainder = B.assembled - np.eye(n + 1) - calK
    rep.bordered_K = calK
    rep.bordered_numeric_rank = numeric_rank(calK)
    rep.bordered_residual_norm = float(np.linalg.norm(remainder, 2))
    return rep


@dataclass
class JboundResult:
    C_fit: float
    holds: bool
    p_hat: int
    E_norm: float
    residual_norms: list[float]
    ratios: list[float]

    def __iter__(self):
        return iter((self.C_fit, self.holds))


def fit_envelope(residual_norms, p_hat: int, E_norm: float, floor: float = ENVELOPE_FLOOR):
    """Smallest C with ||r_{p_hat+k}|| <= C E^k ||r_0|| over the recorded k.

    Residuals at or below ``floor * ||r_0||`` are skipped.
    """
    r = np.asarray(residual_norms, dtype=float)
    if r.size <= p_hat:
        raise InsufficientDataError(f"trace has {r.size - 1} iterations, fewer than p_hat = {p_hat}")
    r0 = r[0]
    if r0 == 0.0:
        return 0.0, []
    ratios = []
    for k, rk in enumerate(r[p_hat:]):
        if rk <= floor * r0:
            ratios.append(0.0)
            continue
        env = E_norm ** k
        ratios.append(math.inf if env == 0.0 else float(rk / (env * r0)))
    return (max(ratios) if ratios else 0.0), ratios


def verify_jbound(op, p_hat: int, E_norm: float, b, *, max_C: float = math.inf,
                  floor: float = ENVELOPE_FLOOR) -> JboundResult:
    """Run GMRES to rounding level and fit the geometric envelope constant.

    A trace that converged in fewer than p_hat iterations is padded with its
    final residual, since later residuals cannot exceed it.
    """
    op = aslinearoperator(op)
    b = as_vector(b)
    trace = gmres_solve(op, b, rel_tol=1e-15, max_iter=op.dimension)
    norms = list(trace.residual_norms)
    if trace.converged and len(norms) <= p_hat:
        norms += [norms[-1]] * (p_hat + 1 - len(norms))
    C, ratios = fit_envelope(norms, p_hat, E_norm, floor)
    holds = bool(math.isfinite(C) and C <= max_C)
    return JboundResult(C, holds, p_hat, E_norm, list(trace.residual_norms), ratios)


def observed_plateau(residual_norms, rel_tol: float = 1e-12) -> int | None:
    """First iteration whose residual is below rel_tol * ||r_0||."""
    r = np.asarray(residual_norms)
    hit = np.flatnonzero(r <= rel_tol * r[0])
    return int(hit[0]) if hit.size else None
