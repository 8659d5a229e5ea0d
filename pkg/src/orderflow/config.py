"""Flat ``key = value`` run configuration.

Blank lines and lines starting with ``#`` are ignored. Unknown keys are
rejected with the offending line number.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    # limit constants
    alpha0: float = 0.375
    lambda0: float = 1.0
    mu0: float = 1.0
    lambda1: float = 1.0
    # kernels
    core_kernel: str = "shifted_pareto"
    reaction_kernel: str = "shifted_pareto"
    phi1_mass: float = 0.75
    phi2_mass: float = 0.25
    # horizon and discretisation
    T: float = 1024.0
    n_steps: int = 1024
    n_grid: int = 256
    # Monte Carlo
    seed: int = 0
    paths: int = 1
    threads: int = 1
    # mixed / fractional Brownian motion
    H: float = 0.775
    sigma_W: float = 1.0
    sigma_H: float = 1.0
    dt: float = 0.01
    n_points: int = 2 ** 12
    # impact
    kappa: float = 1.0
    # output
    out: str = "."

    def resolved(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.resolved().items())


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"float": float, "int": int, "str": str}


def _cast(key, raw, lineno):
    kind = _TYPES[key]
    try:
        if kind == "int":
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return _CASTS[kind](raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects {kind}, got {raw!r}") from None


def parse_config(text: str, **overrides) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _cast(key, raw, lineno)
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _TYPES:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = value
    cfg = RunConfig(**values)
    if cfg.paths < 1 or cfg.threads < 1 or cfg.seed < 0:
        raise ConfigError("paths and threads must be >= 1 and seed >= 0")
    return cfg


def load_config(path, **overrides) -> RunConfig:
    if path is None:
        return parse_config("", **overrides)
    with open(path) as fh:
        return parse_config(fh.read(), **overrides)
