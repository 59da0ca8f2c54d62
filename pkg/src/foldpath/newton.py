"""Undamped Newton iteration with a direct (LU) or matrix-free GMRES inner solve."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gmres import LinearOperator, gmres_solve
from .linalg import EPS, SingularMatrixError, as_vector, lu_solve

ABS_TOL = 1e-10
REL_TOL = 1e-10
MAX_ITER = 20
FORCING = 1e-4


class NewtonError(RuntimeError):
    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class SingularJacobianError(NewtonError):
    def __init__(self, message, iterate, pivot_index):
        super().__init__(message, iterate)
        self.pivot_index = pivot_index


class NewtonGmresError(NewtonError):
    def __init__(self, message, iterate, trace):
        super().__init__(message, iterate)
        self.trace = trace


@dataclass
class NewtonResult:
    solution: np.ndarray
    iterations: int
    step_norms: list[float]
    residual_norms: list[float]
    gmres_iterations_per_step: list[int] = field(default_factory=list)
    converged: bool = False
    q_order_estimate: float = math.nan

    @property
    def krylovs_per_newton(self) -> float:
        if not self.gmres_iterations_per_step:
            return math.nan
        return float(np.mean(self.gmres_iterations_per_step))

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residual_norms": list(self.residual_norms),
            "step_norms": list(self.step_norms),
            "gmres_iterations_per_step": list(self.gmres_iterations_per_step),
            "q_order_estimate": None if math.isnan(self.q_order_estimate) else self.q_order_estimate,
        }


def q_order_estimate(step_norms, floor: float = 0.0) -> float:
    """Slope of log||s_{k+1}|| against log||s_k|| by least squares.

    About 2 for q-quadratic convergence, about 1 for q-linear. Steps at or
    below ``floor`` (rounding level) are dropped first. Returns nan when
    fewer than three usable steps remain.
    """
    s = np.asarray([v for v in step_norms if v > floor and np.isfinite(v)], dtype=float)
    if s.size < 3:
        return math.nan
    ls = np.log(s)
    slope, _ = np.polyfit(ls[:-1], ls[1:], 1)
    return float(slope)


def _rounding_floor(x):
    return 1e3 * EPS * (1.0 + float(np.linalg.norm(x)))


def _residual(F, x):
    r = as_vector(F(x))
    if not np.all(np.isfinite(r)):
        raise NewtonError("residual is not finite", x)
    return r


def newton_direct(F: Callable, J: Callable, x0, *, abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL,
                  max_iter: int = MAX_ITER) -> NewtonResult:
    x = as_vector(x0).copy()
    r = _residual(F, x)
    res = [float(np.linalg.norm(r))]
    tol = abs_tol + rel_tol * res[0]
    steps: list[float] = []
    it = 0
    while res[-1] > tol and it < max_iter:
        try:
            s = lu_solve(J(x), -r)
        except SingularMatrixError as exc:
            raise SingularJacobianError(f"singular Jacobian at Newton iterate {it}: {exc}", x, exc.pivot_index) from exc
        x = x + s
        it += 1
        steps.append(float(np.linalg.norm(s)))
        r = _residual(F, x)
        res.append(float(np.linalg.norm(r)))
    return NewtonResult(
        solution=x, iterations=it, step_norms=steps, residual_norms=res,
        converged=res[-1] <= tol, q_order_estimate=q_order_estimate(steps, _rounding_floor(x)),
    )


def fd_jacobian_operator(F: Callable, x: np.ndarray, Fx: np.ndarray) -> LinearOperator:
    """Forward-difference directional derivatives of F at x.

    h = sqrt(eps) * (1 + ||x||) / ||v||.
    """
    base = math.sqrt(EPS) * (1.0 + float(np.linalg.norm(x)))

    def apply(v):
        vn = float(np.linalg.norm(v))
        if vn == 0.0:
            return np.zeros_like(Fx)
        h = base / vn
        return (as_vector(F(x + h * v)) - Fx) / h

    return LinearOperator(x.size, apply)


def newton_gmres(F: Callable, x0, *, forcing: float = FORCING, abs_tol: float = ABS_TOL,
                 rel_tol: float = REL_TOL, max_iter: int = MAX_ITER,
                 gmres_max_iter: int | None = None) -> NewtonResult:
    """Newton-Krylov: each step solves J s = -F to relative residual ``forcing``."""
    x = as_vector(x0).copy()
    r = _residual(F, x)
    res = [float(np.linalg.norm(r))]
    tol = abs_tol + rel_tol * res[0]
    steps: list[float] = []
    inner: list[int] = []
    it = 0
    while res[-1] > tol and it < max_iter:
        op = fd_jacobian_operator(F, x, r)
        trace = gmres_solve(op, -r, rel_tol=forcing, max_iter=gmres_max_iter or x.size)
        if not trace.converged:
            raise NewtonGmresError(f"GMRES did not reach {forcing:g} in {trace.iterations} iterations", x, trace)
        s = trace.solution
        inner.append(trace.iterations)
        x = x + s
        it += 1
        steps.append(float(np.linalg.norm(s)))
        r = _residual(F, x)
        res.append(float(np.linalg.norm(r)))
    return NewtonResult(
        solution=x, iterations=it, step_norms=steps, residual_norms=res,
        gmres_iterations_per_step=inner, converged=res[-1] <= tol,
        q_order_estimate=q_order_estimate(steps, _rounding_floor(x)),
    )


def solve(F, J, x0, backend: str = "direct", **kw) -> NewtonResult:
    if backend == "direct":
        kw.pop("forcing", None)
        kw.pop("gmres_max_iter", None)
        return newton_direct(F, J, x0, **kw)
    if backend == "gmres":
        return newton_gmres(F, x0, **kw)
    raise ValueError(f"unknown Newton backend {backend!r}")

