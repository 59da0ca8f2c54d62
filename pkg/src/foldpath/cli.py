"""Command line entry point.

    foldpath run CONFIG_FILE
    foldpath run --experiment fig1-bifurcation [--nodes 200 --ds 0.5 --backend direct --out DIR]

Exit codes: 0 success, 2 partial path, 3 property violation, 4 config error.
FOLDPATH_SEED overrides the configured seed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import EXPERIMENTS, ConfigError, RunConfig, apply_overrides, load_config
from .experiments import EXIT_CONFIG, run

log = logging.getLogger("foldpath")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foldpath", description="Continuation through simple folds")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment or property suite")
    r.add_argument("config", nargs="?", help="key = value configuration file")
    r.add_argument("--experiment", choices=EXPERIMENTS)
    r.add_argument("--nodes", type=int)
    r.add_argument("--ds", type=float)
    r.add_argument("--s-end", dest="s_end", type=float)
    r.add_argument("--backend", choices=("direct", "gmres"))
    r.add_argument("--forcing", type=float)
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--lambda-min", dest="lambda_min", type=float)
    r.add_argument("--adaptive", action="store_true", default=None)
    r.add_argument("--out")
    r.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("experiments", help="list experiment names")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiments":
        print("\n".join(EXPERIMENTS))
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.config:
            cfg = load_config(args.config)
        elif args.experiment:
            cfg = RunConfig(experiment=args.experiment)
        else:
            raise ConfigError("give a config file or --experiment")
        overrides = {k: getattr(args, k) for k in ("experiment", "nodes", "ds", "s_end", "backend",
                                                   "forcing", "seed", "trials", "lambda_min",
                                                   "adaptive", "out")}
        cfg = apply_overrides(cfg, overrides).resolved()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("running %s into %s", cfg.experiment, cfg.out)
    art = run(cfg)
    print(json.dumps({"experiment": cfg.experiment, "exit_code": art.exit_code, "out": str(art.out_dir),
                      "files": [str(f) for f in art.files]}, indent=2))
    return art.exit_code


if __name__ == "__main__":
    sys.exit(main())
