"""Flat key=value run configuration.

The format is UTF-8 text, one ``key = value`` per line, ``#`` starts a
comment, blank lines ignored.  Unknown and duplicated keys are rejected
with the offending line number.  See README for the full key reference.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import initcond, models
from .models import ModelSpec
from .spectral import Grid2D, make_grid
from .timestep import SchemeConfig


class ConfigError(Exception):
    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)


@dataclass
class RunConfig:
    # required
    model: str = ""
    nx: int = 0
    ny: int = 0
    x0: float = 0.0
    x1: float = 0.0
    y0: float = 0.0
    y1: float = 0.0
    tau: float = 0.0
    T: float = 0.0
    init: str = ""
    # scheme
    stepper: str = "cn"
    correction: str = "eop"
    eta: float = 0.5
    # physics
    alpha0: float = 0.01
    eps: float = 0.01
    M: float = 1.0
    kappa: float = 0.0
    beta: float = 1.0
    C0: float = 100.0
    # initial-condition parameters (None = per-kind default)
    seed: int = 42
    init_a: float | None = None
    init_b: float | None = None
    init_c: float | None = None
    init_offset: float | None = None
    init_amp: float | None = None
    init_phibar: float | None = None
    init_k: float | None = None
    init_radius: float | None = None
    # solver / output
    lin_tol: float = 1e-12
    lin_maxit: int = 500
    dealias: int = 0
    snapshot_every: int = 0
    trace_every: int = 1
    out_dir: str = "out"


_REQUIRED = ("model", "nx", "ny", "x0", "x1", "y0", "y1", "tau", "T", "init")
_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CHOICES = {
    "model": ("ac", "ch", "pfc", "mbe"),
    "stepper": ("bdf1", "bdf2", "cn"),
    "correction": ("baseline", "relax", "eop"),
    "init": ("tanh_star", "random", "ellipse_circle", "polycrystal", "mbe_bench"),
}
_INT_KEYS = {"nx", "ny", "seed", "lin_maxit", "dealias", "snapshot_every",
             "trace_every"}
_STR_KEYS = {"model", "stepper", "correction", "init", "out_dir"}


def _convert(key: str, raw: str):
    if key in _STR_KEYS:
        return raw
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"key {key!r} wants an integer, got {raw!r}")
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"key {key!r} wants a number, got {raw!r}")


def parse_config(path) -> RunConfig:
    """Parse and validate a config file; raises :class:`ConfigError`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(exc), path=path)

    values: dict[str, object] = {}
    seen_lines: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}",
                              path=path, line=lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", path=path, line=lineno)
        if key in seen_lines:
            raise ConfigError(f"duplicate key {key!r} (first on line "
                              f"{seen_lines[key]})", path=path, line=lineno)
        seen_lines[key] = lineno
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(str(exc), path=path, line=lineno)

    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}", path=path)

    cfg = RunConfig(**values)
    try:
        _validate(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc), path=path)
    return cfg


def _validate(cfg: RunConfig) -> None:
    for key, choices in _CHOICES.items():
        if getattr(cfg, key) not in choices:
            raise ValueError(f"{key}={getattr(cfg, key)!r} not one of {choices}")
    for key in ("tau", "T", "alpha0", "eps", "M", "beta", "C0", "lin_tol"):
        if getattr(cfg, key) <= 0:
            raise ValueError(f"{key} must be positive")
    if cfg.kappa < 0:
        raise ValueError("kappa must be >= 0")
    if not (0.0 <= cfg.eta <= 1.0):
        raise ValueError(f"eta={cfg.eta} outside [0, 1]")
    if cfg.dealias not in (0, 1):
        raise ValueError("dealias must be 0 or 1")
    if cfg.lin_maxit < 1:
        raise ValueError("lin_maxit must be >= 1")
    if cfg.snapshot_every < 0 or cfg.trace_every < 0:
        raise ValueError("snapshot_every/trace_every must be >= 0")
    if cfg.model == "pfc" and cfg.beta <= cfg.eps:
        raise ValueError(f"pfc needs beta > eps (got beta={cfg.beta}, eps={cfg.eps})")


# -- builders ------------------------------------------------------------------


def build_grid(cfg: RunConfig) -> Grid2D:
    return make_grid(cfg.nx, cfg.ny, cfg.x0, cfg.x1, cfg.y0, cfg.y1)


def build_model(cfg: RunConfig) -> ModelSpec:
    if cfg.model == "ac":
        return models.allen_cahn(cfg.alpha0, cfg.eps, cfg.M, cfg.C0)
    if cfg.model == "ch":
        return models.cahn_hilliard(cfg.alpha0, cfg.eps, cfg.M, cfg.kappa, cfg.C0)
    if cfg.model == "pfc":
        return models.phase_field_crystal(cfg.eps, cfg.beta, cfg.M)
    return models.epitaxy(cfg.eps, cfg.M, cfg.C0)


def build_scheme(cfg: RunConfig, correction: str | None = None,
                 eta: float | None = None) -> SchemeConfig:
    return SchemeConfig(
        stepper=cfg.stepper,
        correction=cfg.correction if correction is None else correction,
        eta=cfg.eta if eta is None else eta,
        tau=cfg.tau, t_final=cfg.T,
        lin_tol=cfg.lin_tol, lin_maxit=cfg.lin_maxit,
        dealias=bool(cfg.dealias),
    )


def build_initial(cfg: RunConfig, grid: Grid2D) -> np.ndarray:
    def pick(value, default):
        return default if value is None else value

    if cfg.init == "tanh_star":
        return initcond.tanh_star(
            grid, a=pick(cfg.init_a, 1.5), b=pick(cfg.init_b, 1.2),
            c=pick(cfg.init_c, 2.0 * np.pi), eps=cfg.eps)
    if cfg.init == "random":
        return initcond.seeded_random(
            grid, offset=pick(cfg.init_offset, 0.25),
            amplitude=pick(cfg.init_amp, 0.4), seed=cfg.seed)
    if cfg.init == "ellipse_circle":
        return initcond.ellipse_circle(grid, eps=cfg.eps)
    if cfg.init == "polycrystal":
        return initcond.polycrystal(
            grid, radius=cfg.init_radius, mean=pick(cfg.init_phibar, 0.285),
            amplitude=pick(cfg.init_amp, 0.446),
            wavenumber=pick(cfg.init_k, 1.0))
    return initcond.mbe_benchmark(grid)
