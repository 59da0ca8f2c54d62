"""Experiment runners behind the CLI: figure reproductions and property suites."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from . import artifacts
from .bounds import rank_one_lower_bound, weyl_interval
from .cluster import bordered_splitting, verify_jbound
from .config import RunConfig
from .continuation import NewtonOptions, PsarcOptions, paramc, psarc
from .problems import HEquation, ToyFold, heq_norm_closed_form, synthetic_cluster_operator

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_VIOLATION = 3
EXIT_CONFIG = 4


@dataclass
class Artifacts:
    out_dir: FsPath
    files: list[FsPath] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK
    path: object = None


def newton_options(cfg: RunConfig) -> NewtonOptions:
    return NewtonOptions(backend=cfg.backend or "direct", forcing=cfg.forcing, abs_tol=cfg.abs_tol,
                         rel_tol=cfg.rel_tol, max_iter=cfg.max_newton)


def psarc_options(cfg: RunConfig) -> PsarcOptions:
    return PsarcOptions(predictor=cfg.predictor, adaptive=cfg.adaptive,
                        lambda_min=cfg.lambda_min if cfg.lambda_min is not None else -math.inf,
                        lambda_max=cfg.lambda_max, diagnostics=bool(cfg.diagnostics))


def heq_psarc(cfg: RunConfig):
    prob = HEquation(cfg.nodes)
    u0, c0 = prob.initial_point()
    path = psarc(prob, cfg.s_end, cfg.ds, np.append(u0, c0), newton=newton_options(cfg),
                 options=psarc_options(cfg))
    # the output location is not part of the result
    path.config_snapshot["run"] = cfg.to_text(exclude=("out",))
    return prob, path


def path_summary(prob, path) -> dict:
    lam = path.lambdas
    i = int(np.argmax(lam))
    top = path.points[i]
    out = {
        "points": len(path),
        "failure": path.failure,
        "max_lambda": float(lam[i]),
        "functional_at_max_lambda": prob.functional(top.u),
        "passed_fold": bool(i < len(lam) - 1 and lam[-1] < lam[i]),
        "final_lambda": float(lam[-1]),
        "final_s": path.points[-1].s,
    }
    diags = [p.diagnostics for p in path.points if p.diagnostics is not None]
    if diags:
        out["min_sigma_min_Fx"] = min(d.sigma_min_Fx_actual for d in diags)
        out["min_sigma_N_Gu"] = min(d.sigma_N for d in diags)
        valid = [d for d in diags if d.sigma_min_Fx_bound is not None]
        out["bound_valid_points"] = len(valid)
        out["bound_exceeds_actual_points"] = sum(
            d.sigma_min_Fx_actual < d.sigma_min_Fx_bound - 1e-8 * d.fx_norm for d in valid)
        out["weyl_bound_exceeds_actual_points"] = sum(
            d.sigma_min_Fx_actual < d.sigma_min_Fx_bound_weyl - 1e-8 * d.fx_norm for d in valid)
    if isinstance(prob, HEquation):
        phi = prob.null_vector(top.u)
        Gh = prob.jacobian(top.u, top.lam)
        out["null_vector_residual"] = float(np.linalg.norm(Gh @ phi) / np.linalg.norm(phi))
    return out


def _write_path(art: Artifacts, prob, path, stem: str):
    out = art.out_dir
    art.files.append(artifacts.write_path_csv(out / f"{stem}.csv", path, prob))
    art.files.append(artifacts.write_path_json(out / f"{stem}.json", path, prob))
    if any(p.diagnostics is not None for p in path.points):
        art.files.append(artifacts.write_diagnostics_csv(out / f"{stem}_diagnostics.csv", path))


def _finish(art: Artifacts, cfg: RunConfig, path) -> Artifacts:
    art.files.append(artifacts.atomic_write_text(art.out_dir / "config.txt", cfg.to_text()))
    art.files.append(artifacts.write_json(art.out_dir / "summary.json",
                                          {"schema_version": artifacts.SCHEMA_VERSION,
                                           "experiment": cfg.experiment, **art.summary}))
    if path is not None and path.failure is not None:
        art.exit_code = EXIT_PARTIAL
    return art


def run_fig1(cfg: RunConfig) -> Artifacts:
    """||H||_1 against c along the pseudo-arclength path, with the closed-form branches."""
    cfg = cfg.resolved()
    art = Artifacts(FsPath(cfg.out))
    prob, path = heq_psarc(cfg)
    art.path = path
    _write_path(art, prob, path, "path")
    cs = path.lambdas
    norms = [prob.functional(p.u) for p in path.points]
    grid = np.linspace(1e-3, 1.0, 400)
    lower = [heq_norm_closed_form(c, "lower") for c in grid]
    upper = [heq_norm_closed_form(c, "upper") for c in grid]
    ymax = max(norms) * 1.05
    upper = [u if u <= ymax else None for u in upper]
    art.files.append(artifacts.write_svg(
        art.out_dir / "fig1_bifurcation.svg",
        [("computed path", cs.tolist(), norms),
         ("closed form, lower branch", grid.tolist(), lower),
         ("closed form, upper branch", grid.tolist(), upper)],
        title=f"||H||_1 vs c  (N={cfg.nodes}, ds={cfg.ds})", xlabel="c", ylabel="||H||_1"))
    art.summary = path_summary(prob, path)
    lower_gap = [abs(n - heq_norm_closed_form(c, "lower"))
                 for p, c, n in zip(path.points, cs, norms)
                 if 0 < c < 1 and p.tangent[-1] > 0]
    art.summary["max_lower_branch_gap"] = max(lower_gap) if lower_gap else None
    return _finish(art, cfg, path)


def run_fig2(cfg: RunConfig) -> Artifacts:
    """sigma_min of the bordered Jacobian along the path, its lower bounds, and sigma_N(G_u)."""
    cfg = cfg.resolved()
    art = Artifacts(FsPath(cfg.out))
    prob, path = heq_psarc(cfg)
    art.path = path
    _write_path(art, prob, path, "path")
    cs = path.lambdas.tolist()
    d = [p.diagnostics for p in path.points]
    art.files.append(artifacts.write_svg(
        art.out_dir / "fig2_sigmamin.svg",
        [("sigma_min(F_x)", cs, [x.sigma_min_Fx_actual for x in d]),
         ("bound sqrt(1 - tau max(1/alpha,1))", cs, [x.sigma_min_Fx_bound for x in d]),
         ("bound sqrt(min(alpha,1) - tau)", cs, [x.sigma_min_Fx_bound_weyl for x in d]),
         ("sigma_N(G_u)", cs, [x.sigma_N for x in d])],
        title=f"smallest singular values (N={cfg.nodes}, ds={cfg.ds})", xlabel="c",
        ylabel="singular value"))

    u0, c0 = prob.initial_point()
    pc = paramc(prob, c0, cfg.lambda_max, cfg.paramc_dlambda, u0,
                newton=newton_options(cfg), diagnostics=True)
    _write_path(art, prob, pc, "paramc")
    pc_sig = [p.diagnostics.sigma_N for p in pc.points]
    art.files.append(artifacts.write_svg(
        art.out_dir / "fig2_paramc_contrast.svg",
        [("paramc: sigma_N(G_u)", pc.lambdas.tolist(), pc_sig),
         ("psarc: sigma_min(F_x)", cs, [x.sigma_min_Fx_actual for x in d])],
        title="parameter continuation vs pseudo-arclength", xlabel="c", ylabel="singular value"))
    art.summary = path_summary(prob, path)
    art.summary["paramc"] = {"points": len(pc), "last_lambda": float(pc.lambdas[-1]),
                             "failure": pc.failure, "min_sigma_N_Gu": min(pc_sig)}
    return _finish(art, cfg, path)


def krylovs_per_newton(path) -> np.ndarray:
    out = []
    for p in path.points[1:]:
        inner = p.newton_stats.get("gmres_iterations_per_step") or []
        out.append(float(np.mean(inner)) if inner else math.nan)
    return np.array(out)


def run_fig3(cfg: RunConfig) -> Artifacts:
    """Average GMRES iterations per Newton step along a Newton-GMRES path."""
    cfg = cfg.resolved()
    art = Artifacts(FsPath(cfg.out))
    prob, path = heq_psarc(cfg)
    art.path = path
    _write_path(art, prob, path, "path")
    kpn = krylovs_per_newton(path)
    cs = path.lambdas[1:].tolist()
    art.files.append(artifacts.write_svg(
        art.out_dir / "fig3_krylovs.svg", [("Krylovs per Newton", cs, kpn.tolist())],
        title=f"Krylovs per Newton (N={cfg.nodes}, ds={cfg.ds}, forcing={cfg.forcing:g})",
        xlabel="c", ylabel="average GMRES iterations"))
    art.summary = path_summary(prob, path)
    finite = kpn[np.isfinite(kpn)]
    q = max(1, finite.size // 4)
    art.summary.update({
        "max_krylovs_per_newton": float(finite.max()) if finite.size else None,
        "early_mean": float(finite[:q].mean()) if finite.size else None,
        "late_mean": float(finite[-q:].mean()) if finite.size else None,
    })
    return _finish(art, cfg, path)


# --- property suites -------------------------------------------------------

def _check(name, passed, **info):
    return {"name": name, "passed": bool(passed), **info}


def random_psd(rng, n):
    r = int(rng.integers(1, n + 1))
    B = rng.standard_normal((n, r)) * rng.uniform(0.1, 3.0)
    return B @ B.T


def bounds_fuzz(trials: int, max_dim: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    violations = []
    for t in range(trials):
        n = int(rng.integers(2, max_dim + 1))
        A = random_psd(rng, n)
        y = rng.standard_normal(n) * rng.uniform(0.01, 3.0)
        rep = rank_one_lower_bound(A, y)
        lam = float(np.linalg.eigvalsh(A + np.outer(y, y))[0])
        scale = float(np.linalg.norm(A, 2) + y @ y)
        if rep.bound_main > lam + 1e-9 * scale:
            violations.append({"trial": t, "check": "main bound", "bound": rep.bound_main, "lambda_min": lam})
        if rep.bound_helper > lam + 1e-9 * scale:
            violations.append({"trial": t, "check": "helper bound", "bound": rep.bound_helper, "lambda_min": lam})
        lo, hi = weyl_interval(A)
        if not (lo - 1e-9 * scale <= lam <= hi + 1e-9 * scale):
            violations.append({"trial": t, "check": "weyl", "interval": [lo, hi], "lambda_min": lam})
        # aligned y: the bound is attained
        w, Q = np.linalg.eigh(A)
        ya = Q[:, 0] * rng.uniform(0.1, 3.0)
        lam_a = float(np.linalg.eigvalsh(A + np.outer(ya, ya))[0])
        exact = min(w[0] + ya @ ya, w[1])
        if abs(lam_a - exact) > 1e-10 * max(1.0, abs(exact)):
            violations.append({"trial": t, "check": "aligned equality", "lambda_min": lam_a, "expected": exact})
    return {"trials": trials, "max_dim": max_dim, "seed": seed, "violations": violations}


def cluster_verify(p: int, eps: float, dimension: int, seed: int, max_C: float) -> dict:
    op, K, E = synthetic_cluster_operator(dimension, p, eps, seed)
    rng = np.random.default_rng(seed + 1)
    b = rng.standard_normal(dimension)
    jb = verify_jbound(op, p + 1, eps, b, max_C=max_C)
    J = np.eye(dimension) + K + E
    gl = rng.standard_normal(dimension)
    tg = rng.standard_normal(dimension + 1)
    tg /= np.linalg.norm(tg)
    rep = bordered_splitting(J, gl, tg, eps=min(0.1, 10 * eps))
    checks = [
        _check("jbound envelope", jb.holds, C_fit=jb.C_fit, max_C=max_C, p_hat=p + 1),
        _check("bordered rank <= p + 2", rep.bordered_numeric_rank <= rep.p + 2,
               p=rep.p, rank=rep.bordered_numeric_rank),
        _check("||F_x - I - calK|| = ||E||",
               abs(rep.bordered_residual_norm - rep.E_norm) <= 1e-12 * max(1.0, rep.E_norm),
               residual=rep.bordered_residual_norm, E_norm=rep.E_norm),
    ]
    return {"p": p, "eps": eps, "dimension": dimension, "seed": seed, "checks": checks,
            "residual_norms": jb.residual_norms}


def toy_fold_run(ds: float, s_end: float, newton: NewtonOptions) -> dict:
    prob = ToyFold()
    u0, l0 = prob.initial_point()
    path = psarc(prob, s_end, ds, np.append(u0, l0), newton=newton)
    lam = path.lambdas
    u = np.array([p.u[0] for p in path.points])
    i = int(np.argmax(lam))
    # compared as lambda = 1 - u^2: u = +-sqrt(1 - lambda) is ill-conditioned at the fold
    err = float(np.max(np.abs(lam - (1 - u * u))))
    after = np.diff(lam[i:])
    checks = [
        _check("max lambda within 1e-3 of 1", abs(lam[i] - 1) <= 1e-3, max_lambda=float(lam[i])),
        _check("u matches +-sqrt(1 - lambda)", err <= 10 * newton.abs_tol, max_error=err),
        _check("lambda decreases after the fold", bool(np.all(after < 0)) and after.size > 0),
        _check("no failure", path.failure is None, failure=path.failure),
    ]
    return {"ds": ds, "points": len(path), "checks": checks}


def run_suite(cfg: RunConfig) -> Artifacts:
    cfg = cfg.resolved()
    art = Artifacts(FsPath(cfg.out))
    if cfg.experiment == "bounds-fuzz":
        res = bounds_fuzz(cfg.trials, cfg.max_dim, cfg.seed)
        passed = not res["violations"]
    elif cfg.experiment == "cluster-verify":
        res = cluster_verify(cfg.p, cfg.eps, cfg.dimension, cfg.seed, cfg.max_C)
        passed = all(c["passed"] for c in res["checks"])
        art.files.append(artifacts.write_csv(art.out_dir / "gmres_trace.csv", artifacts.TRACE_COLUMNS,
                                             list(enumerate(res["residual_norms"]))))
    elif cfg.experiment == "toy-fold":
        res = toy_fold_run(cfg.ds, cfg.s_end, newton_options(cfg))
        passed = all(c["passed"] for c in res["checks"])
    else:
        raise ValueError(f"{cfg.experiment} is not a property suite")
    verdict = {"schema_version": artifacts.SCHEMA_VERSION, "experiment": cfg.experiment,
               "passed": passed, **res}
    art.files.append(artifacts.write_json(art.out_dir / "verdict.json", verdict))
    art.files.append(artifacts.atomic_write_text(art.out_dir / "config.txt", cfg.to_text()))
    art.summary = verdict
    art.exit_code = EXIT_OK if passed else EXIT_VIOLATION
    return art


RUNNERS = {
    "fig1-bifurcation": run_fig1,
    "fig2-sigmamin": run_fig2,
    "fig3-krylovs": run_fig3,
    "bounds-fuzz": run_suite,
    "cluster-verify": run_suite,
    "toy-fold": run_suite,
}


def run(cfg: RunConfig) -> Artifacts:
    return RUNNERS[cfg.resolved().experiment](cfg)
