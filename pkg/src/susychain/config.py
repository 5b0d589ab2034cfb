"""Chain configuration documents (flat JSON)."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

from .chain import BacklundChain
from .errors import ChainError
from .seeds import Family, SeedSpec

CHECKS = ("riccati", "oracle", "scattering", "spectrum", "poles")
FORMATS = ("csv", "json")

DEFAULT_CONFIG = {
    "seeds": [
        {"family": "S", "kappa": 1.0, "shift": -5.0},
        {"family": "R", "kappa": 0.5, "shift": -5.0},
    ],
    "grid": {"x_min": -15.0, "x_max": 15.0, "samples": 2001},
    "verify": {name: True for name in CHECKS},
    "output": {"format": "csv", "path": "susy_grid.csv"},
}


class ConfigError(ValueError):
    pass


@dataclass
class ChainConfig:
    seeds: list[SeedSpec]
    x_min: float
    x_max: float
    samples: int
    verify: dict = field(default_factory=lambda: {name: True for name in CHECKS})
    format: str = "csv"
    path: str | None = None

    def chain(self) -> BacklundChain:
        return BacklundChain(self.seeds)

    def to_dict(self) -> dict:
        return {
            "seeds": [{"family": s.family.value, "kappa": s.kappa, "shift": s.shift} for s in self.seeds],
            "grid": {"x_min": self.x_min, "x_max": self.x_max, "samples": self.samples},
            "verify": dict(self.verify),
            "output": {"format": self.format, "path": self.path},
        }


def _number(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what} must be a number, got {value!r}")
    return float(value)


def _keys(obj, allowed, what):
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} must be an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise ConfigError(f"unknown {what} field(s): {', '.join(sorted(extra))}")


def parse_config(doc) -> ChainConfig:
    _keys(doc, ("seeds", "grid", "verify", "output"), "config")
    raw_seeds = doc.get("seeds")
    if not isinstance(raw_seeds, list) or not raw_seeds:
        raise ConfigError("config needs a non-empty 'seeds' list")
    seeds = []
    for i, raw in enumerate(raw_seeds):
        _keys(raw, ("family", "kappa", "shift"), f"seeds[{i}]")
        try:
            family = Family(raw.get("family"))
        except ValueError:
            raise ConfigError(f"seeds[{i}].family must be one of S, R, P, N") from None
        kappa = _number(raw.get("kappa", 0.0), f"seeds[{i}].kappa")
        shift = _number(raw.get("shift", 0.0), f"seeds[{i}].shift")
        try:
            seeds.append(SeedSpec(family, kappa, shift))
        except ValueError as exc:
            raise ConfigError(f"seeds[{i}]: {exc}") from None

    grid = doc.get("grid", DEFAULT_CONFIG["grid"])
    _keys(grid, ("x_min", "x_max", "samples"), "grid")
    x_min = _number(grid.get("x_min"), "grid.x_min")
    x_max = _number(grid.get("x_max"), "grid.x_max")
    samples = grid.get("samples")
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise ConfigError("grid.samples must be an integer >= 2")
    if not x_min < x_max:
        raise ConfigError("grid.x_min must be < grid.x_max")

    verify = doc.get("verify", {})
    _keys(verify, CHECKS, "verify")
    flags = {name: bool(verify.get(name, True)) for name in CHECKS}

    output = doc.get("output", {})
    _keys(output, ("format", "path"), "output")
    fmt = output.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError("output.format must be 'csv' or 'json'")

    cfg = ChainConfig(seeds, x_min, x_max, samples, flags, fmt, output.get("path"))
    try:
        cfg.chain()
    except ChainError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path=None) -> ChainConfig:
    if path is None:
        return parse_config(copy.deepcopy(DEFAULT_CONFIG))
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc)
