"""Regenerate the three H-equation figures and the property-suite verdicts.

    python3 scripts/reproduce_figures.py [--out results] [--quick]

--quick uses 100 nodes for every figure so the whole run takes seconds.
"""
import argparse
import json
import time
from pathlib import Path

from foldpath.config import RunConfig
from foldpath.experiments import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    codes = {}
    for exp in ("fig1-bifurcation", "fig2-sigmamin", "fig3-krylovs", "bounds-fuzz", "cluster-verify", "toy-fold"):
        cfg = RunConfig(experiment=exp, out=str(out / exp))
        if args.quick and exp.startswith("fig"):
            cfg.nodes = 100
        t0 = time.perf_counter()
        art = run(cfg)
        codes[exp] = art.exit_code
        print(f"{exp:18s} exit {art.exit_code}  {time.perf_counter() - t0:6.1f} s  -> {art.out_dir}")
    print(json.dumps(codes))
    return max(codes.values())


if __name__ == "__main__":
    raise SystemExit(main())
