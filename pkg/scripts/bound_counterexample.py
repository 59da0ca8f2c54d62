"""Compare the two sigma_min(F_x) lower bounds on a 2 x 2 fold and on the H-equation path.

For alpha < 1 the bound sqrt(1 - tau max(1/alpha, 1)) can exceed the true
smallest singular value of the bordered Jacobian; sqrt(min(alpha, 1) - tau)
cannot.

    python3 scripts/bound_counterexample.py [--nodes 200 --ds 0.5]
"""
import argparse

import numpy as np

from foldpath.continuation import NewtonOptions, PsarcOptions, psarc
from foldpath.fold import classify_point
from foldpath.problems import HEquation


def small_case():
    d = classify_point(np.diag([1.0, 0.0]), [0.0, 0.1], [0.0, 1.0, 0.0])
    print("G_u = diag(1, 0), G_lam = (0, 0.1), exact tangent (0, 1, 0)")
    print(f"  alpha = {d.alpha:.4g}, tau = {d.tau:.3g}")
    print(f"  sqrt(1 - tau max(1/alpha,1)) = {d.sigma_min_Fx_bound:.4g}")
    print(f"  sqrt(min(alpha,1) - tau)     = {d.sigma_min_Fx_bound_weyl:.4g}")
    print(f"  sigma_min(F_x)               = {d.sigma_min_Fx_actual:.4g}")


def path_case(nodes, ds):
    prob = HEquation(nodes)
    path = psarc(prob, 1e6, ds, np.append(np.ones(nodes), 0.0), newton=NewtonOptions(),
                 options=PsarcOptions(lambda_min=0.3))
    valid = [p.diagnostics for p in path.points if p.diagnostics.sigma_min_Fx_bound is not None]
    over = [d for d in valid if d.sigma_min_Fx_actual < d.sigma_min_Fx_bound - 1e-8 * d.fx_norm]
    over_w = [d for d in valid if d.sigma_min_Fx_actual < d.sigma_min_Fx_bound_weyl - 1e-8 * d.fx_norm]
    print(f"H-equation path, N={nodes}, ds={ds}: {len(path)} points, {len(valid)} with tau < min(alpha, 1)")
    print(f"  first bound above sigma_min(F_x): {len(over)} points")
    print(f"  Weyl bound above sigma_min(F_x):  {len(over_w)} points")
    if over:
        i = int(np.argmax([d.sigma_min_Fx_bound - d.sigma_min_Fx_actual for d in over]))
        d = over[i]
        print(f"  worst: alpha = {d.alpha:.3g}, tau = {d.tau:.3g}, bound = {d.sigma_min_Fx_bound:.4f}, "
              f"actual = {d.sigma_min_Fx_actual:.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=200)
    ap.add_argument("--ds", type=float, default=0.5)
    args = ap.parse_args()
    small_case()
    path_case(args.nodes, args.ds)
