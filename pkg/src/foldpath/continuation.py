"""Parameter continuation and pseudo-arclength continuation drivers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fold import FoldDiagnostics, classify_point
from .gmres import GmresError
from .linalg import LinalgError, PreconditionError, SingularMatrixError, as_vector, lu_solve
from .newton import ABS_TOL, FORCING, MAX_ITER, REL_TOL, NewtonError, solve
from .problems import DomainError, ProblemDef

SOLVE_FAILURES = (NewtonError, GmresError, LinalgError, DomainError)


class ContinuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class NewtonOptions:
    backend: str = "direct"
    forcing: float = FORCING
    abs_tol: float = ABS_TOL
    rel_tol: float = REL_TOL
    max_iter: int = MAX_ITER

    def kwargs(self) -> dict:
        kw = {"abs_tol": self.abs_tol, "rel_tol": self.rel_tol, "max_iter": self.max_iter}
        if self.backend == "gmres":
            kw["forcing"] = self.forcing
        return kw


@dataclass
class PathPoint:
    u: np.ndarray
    lam: float
    s: float
    tangent: np.ndarray
    diagnostics: FoldDiagnostics | None = None
    newton_stats: dict = field(default_factory=dict)

    @property
    def x(self):
        return np.append(self.u, self.lam)


@dataclass
class Path:
    points: list[PathPoint]
    problem_id: str
    config_snapshot: dict = field(default_factory=dict)
    failure: dict | None = None

    def __len__(self):
        return len(self.points)

    @property
    def lambdas(self):
        return np.array([p.lam for p in self.points])

    @property
    def arclengths(self):
        return np.array([p.s for p in self.points])


@dataclass(frozen=True)
class NormalizationEq:
    x0: np.ndarray
    s0: float
    tangent0: np.ndarray

    def __call__(self, x, s):
        return float(self.tangent0 @ (x - self.x0)) - (s - self.s0)


def extended_residual(problem: ProblemDef, norm_eq: NormalizationEq, x, s) -> np.ndarray:
    """F(x, s) = (G(x), N(x, s)), a vector of length N + 1."""
    x = as_vector(x)
    return np.append(problem.G(x), norm_eq(x, s))


def extended_jacobian(problem: ProblemDef, norm_eq: NormalizationEq, x) -> np.ndarray:
    return np.vstack([problem.G_x(x), norm_eq.tangent0])


def secant_tangent(x_prev, x_curr, previous=None) -> np.ndarray:
    d = as_vector(x_curr) - as_vector(x_prev)
    nd = float(np.linalg.norm(d))
    if nd == 0.0:
        raise PreconditionError("secant of coincident points")
    t = d / nd
    if previous is not None and float(t @ previous) < 0.0:
        t = -t
    return t


def initial_tangent(problem: ProblemDef, x0) -> np.ndarray:
    """Unit solution of G_u udot + G_lam lamdot = 0, oriented with lamdot > 0."""
    x0 = as_vector(x0)
    u, lam = x0[:-1], x0[-1]
    try:
        udot = lu_solve(problem.jacobian(u, lam), -problem.lambda_derivative(u, lam))
    except SingularMatrixError as exc:
        raise ContinuationError(
            "G_u is singular at the starting point; start the continuation away from the fold") from exc
    t = np.append(udot, 1.0)
    return t / np.linalg.norm(t)


def _point(problem, x, s, tangent, result, diagnostics: bool) -> PathPoint:
    diag = None
    if diagnostics:
        u, lam = x[:-1], x[-1]
        diag = classify_point(problem.jacobian(u, lam), problem.lambda_derivative(u, lam), tangent)
    stats = result.summary() if result is not None else {}
    return PathPoint(u=x[:-1].copy(), lam=float(x[-1]), s=float(s), tangent=tangent.copy(),
                     diagnostics=diag, newton_stats=stats)


def _failure(exc, lam=None, s=None) -> dict:
    rec = {"error": type(exc).__name__, "message": str(exc)}
    if lam is not None:
        rec["lambda"] = float(lam)
    if s is not None:
        rec["s"] = float(s)
    return rec


def paramc(problem: ProblemDef, lambda_init: float, lambda_end: float, dlambda: float, u_init,
           *, newton: NewtonOptions = NewtonOptions(), diagnostics: bool = False) -> Path:
    """Solve G(u, lam_k) = 0 for lam_k = lambda_init + k dlambda, warm-starting each solve.

    A failed solve truncates the path and records the failure; this is the
    expected outcome when the path has a fold before lambda_end.
    """
    if not dlambda > 0:
        raise PreconditionError("dlambda must be positive")
    if not lambda_init < lambda_end:
        raise PreconditionError("need lambda_init < lambda_end")
    snapshot = {"driver": "paramc", "lambda_init": lambda_init, "lambda_end": lambda_end,
                "dlambda": dlambda, "backend": newton.backend}
    path = Path([], problem.problem_id, snapshot)
    u = as_vector(u_init).copy()
    prev_x = None
    prev_t = None
    s = 0.0
    k = 0
    while True:
        lam = lambda_init + k * dlambda
        if lam > lambda_end + 1e-12 * max(1.0, abs(lambda_end)):
            break
        try:
            res = solve(lambda v: problem.residual(v, lam), lambda v: problem.jacobian(v, lam), u,
                        backend=newton.backend, **newton.kwargs())
            if not res.converged:
                raise NewtonError(f"Newton did not converge in {res.iterations} iterations", res.solution)
        except SOLVE_FAILURES as exc:
            if not path.points:
                raise ContinuationError(f"no solution at the starting parameter {lam}") from exc
            path.failure = _failure(exc, lam=lam)
            break
        u = res.solution
        x = np.append(u, lam)
        if prev_x is None:
            try:
                t = initial_tangent(problem, x)
            except ContinuationError:
                t = np.zeros(x.size)
                t[-1] = 1.0
        else:
            s += float(np.linalg.norm(x - prev_x))
            t = secant_tangent(prev_x, x, prev_t)
        try:
            path.points.append(_point(problem, x, s, t, res, diagnostics))
        except LinalgError as exc:
            path.failure = _failure(exc, lam=lam)
            break
        prev_x, prev_t = x, t
        k += 1
    return path


@dataclass(frozen=True)
class PsarcOptions:
    predictor: str = "euler-secant"
    adaptive: bool = False
    ds_min: float | None = None
    lambda_min: float = -math.inf
    lambda_max: float = math.inf
    max_points: int = 100000
    diagnostics: bool = True


def psarc(problem: ProblemDef, s_end: float, ds: float, x_init, tangent_init=None, *,
          newton: NewtonOptions = NewtonOptions(), options: PsarcOptions = PsarcOptions()) -> Path:
    """Pseudo-arclength continuation from x_init = (u, lam).

    Each step solves F(x) = (G(x), t0^T (x - x0) - h) = 0 by Newton starting
    from the predictor x0 + h t0 (or x0 with predictor "none"), then replaces
    t0 by the secant through the last two points. The first tangent is the
    exact one unless ``tangent_init`` is given.

    Stops when s reaches s_end, the point budget is spent, lambda exceeds
    ``lambda_max``, or lambda drops below ``lambda_min`` while decreasing.
    With ``adaptive`` a failed correction halves the step (down to ds_min,
    default ds/64) and two quick successes double it back toward ds.
    """
    if not ds > 0:
        raise PreconditionError("ds must be positive")
    if options.predictor not in ("euler-secant", "none"):
        raise PreconditionError(f"unknown predictor {options.predictor!r}")
    x0 = as_vector(x_init).copy()
    g0 = problem.G(x0)
    if float(np.linalg.norm(g0)) > 10 * newton.abs_tol + 1e-8:
        raise PreconditionError("x_init does not solve G within tolerance")
    t0 = initial_tangent(problem, x0) if tangent_init is None else as_vector(tangent_init).copy()
    if abs(float(np.linalg.norm(t0)) - 1.0) > 1e-10:
        raise PreconditionError("tangent_init must have unit norm")

    ds_min = options.ds_min if options.ds_min is not None else ds / 64
    snapshot = {"driver": "psarc", "s_end": s_end, "ds": ds, "backend": newton.backend,
                "forcing": newton.forcing, "predictor": options.predictor,
                "adaptive": options.adaptive, "ds_min": ds_min}
    path = Path([_point(problem, x0, 0.0, t0, None, options.diagnostics)], problem.problem_id, snapshot)
    s0 = 0.0
    h = ds
    quick = 0
    while s0 < s_end - 1e-12 * max(1.0, s_end) and len(path.points) < options.max_points:
        h_try = h
        norm_eq = NormalizationEq(x0, s0, t0)
        s1 = s0 + h_try
        guess = x0 + h_try * t0 if options.predictor == "euler-secant" else x0

        def F(x):
            return extended_residual(problem, norm_eq, x, s1)

        def J(x):
            return extended_jacobian(problem, norm_eq, x)

        try:
            res = solve(F, J, guess, backend=newton.backend, **newton.kwargs())
            if not res.converged:
                raise NewtonError(f"Newton did not converge in {res.iterations} iterations", res.solution)
            x1 = res.solution
            t1 = secant_tangent(x0, x1, t0)
            point = _point(problem, x1, s1, t1, res, options.diagnostics)
        except SOLVE_FAILURES as exc:
            if options.adaptive and h_try / 2 >= ds_min * (1 - 1e-12):
                h = h_try / 2
                quick = 0
                continue
            path.failure = _failure(exc, lam=x0[-1], s=s1)
            break
        path.points.append(point)
        x0, t0, s0 = x1, t1, s1
        if options.adaptive:
            quick = quick + 1 if res.iterations <= 3 else 0
            if quick >= 2 and h < ds:
                h = min(2 * h, ds)
                quick = 0
        lam = x1[-1]
        if lam > options.lambda_max or (lam < options.lambda_min and t1[-1] < 0):
            break
    return path
