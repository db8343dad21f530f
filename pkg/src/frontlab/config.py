"""INI run configuration.

Sections and keys (lists are comma separated)::

    [model]       n, R, m
    [profile]     shape (tail | constant), target_mass or B, r_plateau, r0,
                  r1, alpha, A or A_ratio (mutually exclusive)
    [numerics]    N, eps, safety, T, n_out, tau, max_steps
    [experiment]  mode, ratios, window, min_cells, baseline_alphas, draws
    [output]      directory, gnuplot, figures, snapshots
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError, DomainError
from .model import ModelParams

__all__ = ["RunConfig", "load_config", "parse_config", "MODES"]

MODES = ("simulate", "sweep", "verify", "baseline")


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"expected a comma separated list of numbers, got {text!r}") from exc


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ConfigError(f"expected yes/no, got {text!r}")


@dataclass
class RunConfig:
    # model
    n: int = 1
    R: float = 1.0
    m: float = 2.0
    # profile
    shape: str = "tail"
    target_mass: Optional[float] = 2.0
    B: Optional[float] = None
    r_plateau: float = 0.05
    r0: float = 0.25
    r1: float = 0.5
    alpha: Optional[float] = None
    A: Optional[float] = None
    A_ratio: Optional[float] = 0.5
    # numerics
    N: int = 2048
    eps: tuple = (1e-2, 1e-3, 1e-4)
    safety: float = 0.45
    T: float = 0.02
    n_out: int = 40
    tau: tuple = (1e-6,)
    max_steps: int = 10_000_000
    # experiment
    mode: Optional[str] = None
    ratios: tuple = (0.25, 0.5, 0.75, 1.5, 2.0, 4.0)
    window: tuple = (0.1, 0.6)
    min_cells: float = 3.0
    baseline_alphas: tuple = ()
    draws: int = 100
    # output
    directory: str = "frontlab_out"
    gnuplot: bool = True
    figures: bool = True
    snapshots: bool = True
    source: Optional[str] = field(default=None, compare=False)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.n, self.R, self.m)

    @property
    def tail_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 1.0 / (self.m - 1.0)

    @property
    def output_times(self) -> list:
        return [self.T * k / self.n_out for k in range(self.n_out + 1)]

    def validate(self) -> "RunConfig":
        try:
            p = self.params
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        if self.shape not in ("tail", "constant"):
            raise ConfigError(f"profile shape must be 'tail' or 'constant', got {self.shape!r}")
        if self.A is not None and self.A_ratio is not None:
            raise ConfigError("A and A_ratio are mutually exclusive")
        if self.shape == "tail":
            if self.A is None and self.A_ratio is None:
                raise ConfigError("tail profile needs A or A_ratio")
            if (self.target_mass is None) == (self.B is None):
                raise ConfigError("give exactly one of target_mass and B")
            if not 0.0 < self.r_plateau <= self.r0 < self.r1 < p.R:
                raise ConfigError("need 0 < r_plateau <= r0 < r1 < R")
            if self.tail_alpha <= 0.0:
                raise ConfigError("alpha must be positive")
        elif self.target_mass is None and self.B is None:
            raise ConfigError("constant profile needs target_mass or B")
        if self.N < 4:
            raise ConfigError("N must be at least 4")
        if not self.eps or any(not 0.0 < e < 1.0 for e in self.eps):
            raise ConfigError("every eps must lie in (0, 1)")
        if not 0.0 < self.safety <= 1.0:
            raise ConfigError("safety must lie in (0, 1]")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise ConfigError("T must be positive and finite")
        if self.n_out < 1:
            raise ConfigError("n_out must be at least 1")
        if not self.tau or any(not 0.0 < t < 1.0 for t in self.tau):
            raise ConfigError("every tau must lie in (0, 1)")
        if len(self.window) != 2 or not 0.0 <= self.window[0] < self.window[1] <= 1.0:
            raise ConfigError("window must be two fractions 0 <= a < b <= 1")
        if self.mode is not None and self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if any(r <= 0.0 for r in self.ratios):
            raise ConfigError("sweep ratios must be positive")
        if self.draws < 1:
            raise ConfigError("draws must be positive")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("source")
        return d


_SCHEMA = {
    "model": {"n": int, "R": float, "m": float},
    "profile": {
        "shape": str,
        "target_mass": float,
        "B": float,
        "r_plateau": float,
        "r0": float,
        "r1": float,
        "alpha": float,
        "A": float,
        "A_ratio": float,
    },
    "numerics": {
        "N": int,
        "eps": _floats,
        "safety": float,
        "T": float,
        "n_out": int,
        "tau": _floats,
        "max_steps": int,
    },
    "experiment": {
        "mode": str,
        "ratios": _floats,
        "window": _floats,
        "min_cells": float,
        "baseline_alphas": _floats,
        "draws": int,
    },
    "output": {"directory": str, "gnuplot": _bool, "figures": _bool, "snapshots": _bool},
}


_NULLABLE = {"target_mass", "B", "alpha", "A", "A_ratio", "mode", "baseline_alphas"}


def parse_config(text: str, source: Optional[str] = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case: R and N are case sensitive
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from exc
    values: dict = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        keys = _SCHEMA[section]
        for key, raw in cp.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            raw = raw.strip()
            if raw.lower() in ("", "none", "auto"):
                if key not in _NULLABLE:
                    raise ConfigError(f"{section}.{key} needs a value")
                values[key] = None
                continue
            try:
                values[key] = keys[key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
    # an explicit A switches off the default ratio, an explicit B the default mass
    if values.get("A") is not None and "A_ratio" not in values:
        values["A_ratio"] = None
    if values.get("B") is not None and "target_mass" not in values:
        values["target_mass"] = None
    if "baseline_alphas" in values and values["baseline_alphas"] is None:
        values["baseline_alphas"] = ()
    cfg = RunConfig(**values, source=source)
    return cfg.validate()


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))
