"""Run configuration and its flat ``key = value`` file format.

Example::

    # foldpath run configuration
    schema_version = 1
    experiment = fig1-bifurcation
    nodes = 200
    ds = 0.5

Blank lines and ``#`` comments are ignored. Unset keys take the
experiment's defaults; the resolved configuration is written back out next
to the results.
"""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, fields

SCHEMA_VERSION = 1
SEED_ENV = "FOLDPATH_SEED"

EXPERIMENTS = ("fig1-bifurcation", "fig2-sigmamin", "fig3-krylovs", "bounds-fuzz",
               "cluster-verify", "toy-fold")

# per-experiment defaults for fields left unset
EXPERIMENT_DEFAULTS = {
    "fig1-bifurcation": dict(nodes=200, ds=0.5, backend="direct", s_end=1000.0, lambda_min=0.3),
    "fig2-sigmamin": dict(nodes=200, ds=0.5, backend="direct", s_end=1000.0, lambda_min=0.3),
    "fig3-krylovs": dict(nodes=400, ds=0.02, backend="gmres", s_end=1000.0, lambda_min=0.9,
                         diagnostics=False),
    "bounds-fuzz": dict(trials=10_000, max_dim=12),
    "cluster-verify": dict(p=3, eps=1e-2, dimension=100),
    "toy-fold": dict(ds=1e-2, s_end=4.0, backend="direct"),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str = "fig1-bifurcation"
    schema_version: int = SCHEMA_VERSION
    out: str = "results"
    seed: int = 42
    nodes: int | None = None
    ds: float | None = None
    s_end: float | None = None
    backend: str | None = None
    forcing: float = 1e-4
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_newton: int = 20
    predictor: str = "euler-secant"
    adaptive: bool = False
    lambda_min: float | None = None
    lambda_max: float = 1.5
    diagnostics: bool | None = None
    fold_threshold: float = 1e-6
    paramc_dlambda: float = 0.05
    trials: int | None = None
    max_dim: int | None = None
    p: int | None = None
    eps: float | None = None
    dimension: int | None = None
    max_C: float = 1e3

    def resolved(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        cfg = dataclasses.replace(self)
        for key, val in EXPERIMENT_DEFAULTS[self.experiment].items():
            if getattr(cfg, key) is None:
                setattr(cfg, key, val)
        if cfg.diagnostics is None:
            cfg.diagnostics = True
        cfg.validate()
        return cfg

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        for name in ("nodes", "ds", "s_end", "forcing", "abs_tol", "rel_tol", "max_newton",
                     "fold_threshold", "paramc_dlambda", "trials", "max_dim", "dimension", "max_C"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        for name in ("p", "eps", "seed"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be nonnegative, got {v}")
        if self.backend not in (None, "direct", "gmres"):
            raise ConfigError(f"backend must be 'direct' or 'gmres', got {self.backend!r}")
        if self.predictor not in ("euler-secant", "none"):
            raise ConfigError(f"predictor must be 'euler-secant' or 'none', got {self.predictor!r}")
        if self.forcing is not None and not self.forcing < 1:
            raise ConfigError("forcing must be below 1")

    def to_text(self, exclude=()) -> str:
        lines = ["# foldpath run configuration"]
        lines.append(f"schema_version = {self.schema_version}")
        for f in fields(self):
            if f.name == "schema_version" or f.name in exclude:
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {_format(v)}")
        return "\n".join(lines) + "\n"


def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def _coerce(name: str, raw: str, type_str: str):
    raw = raw.strip()
    try:
        if "bool" in type_str:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if "int" in type_str:
            return int(raw)
        if "float" in type_str:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


_FIELD_TYPES = {f.name: str(f.type) for f in fields(RunConfig)}


def parse_config_text(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw, _FIELD_TYPES[key])
    if "schema_version" not in values:
        raise ConfigError("config file must set schema_version")
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    updates = {k: v for k, v in overrides.items() if v is not None}
    cfg = dataclasses.replace(cfg, **updates)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            cfg.seed = int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return cfg
