"""Suite configuration: a YAML file mapped onto dataclasses, with flag overrides."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from .exponent import PRESETS

ALL_SUITES = ("lebesgue", "maximal", "semigroup", "tent", "hardy", "bmo", "fractional")
OUTPUT_ENV = "VHARDY_OUTPUT"


@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    lower: float = -16.0
    upper: float = 16.0
    points: int = 1024
    levels: int = 64
    t_max: float | None = None


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-6
    reproducing: float = 0.01
    area_identity: float = 0.02
    tent_residual: float = 1e-6
    molecular_residual: float = 0.02
    pairing: float = 0.02
    pairing_conditioning: float = 1e-3
    fractional_multiplier: float = 1e-3
    composition: float = 1e-2
    stability_gate: float = 10.0
    drift: float = 0.10


@dataclass(frozen=True)
class SuiteConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    exponent: str = "example-1-capped"
    semigroup: dict = field(default_factory=lambda: {"kind": "gaussian", "m": 2.0})
    suites: tuple = ALL_SUITES
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    trials: int = 6
    family_depth: int = 7
    gamma: float = 0.125
    output_dir: str | None = None
    plots: bool = False

    def __post_init__(self):
        unknown = [s for s in self.suites if s not in ALL_SUITES]
        if unknown:
            raise ValueError(f"unknown suites: {unknown}; choose from {list(ALL_SUITES)}")
        name = self.exponent
        if not (name in PRESETS or name.startswith(("const:", "expr:"))):
            raise ValueError(f"unknown exponent preset {name!r} (use const:<v>, expr:<formula> "
                             f"or one of {sorted(PRESETS)})")
        if self.trials < 1:
            raise ValueError("trials must be positive")

    def resolved_output_dir(self) -> Path:
        return Path(self.output_dir or os.environ.get(OUTPUT_ENV) or "vhardy-out")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["suites"] = list(self.suites)
        return d

    @classmethod
    def from_dict(cls, d: dict | None) -> "SuiteConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "grid" in d:
            d["grid"] = GridConfig(**(d["grid"] or {}))
        if "tolerances" in d:
            d["tolerances"] = Tolerances(**(d["tolerances"] or {}))
        if "suites" in d:
            d["suites"] = tuple(d["suites"] or ())
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SuiteConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def override(self, **changes) -> "SuiteConfig":
        """Copy with the non-None entries of ``changes`` applied (``grid_*`` keys go to the grid)."""
        grid_changes = {k[5:]: v for k, v in changes.items() if k.startswith("grid_") and v is not None}
        top = {k: v for k, v in changes.items() if not k.startswith("grid_") and v is not None}
        if "suites" in top:
            top["suites"] = tuple(top["suites"])
        out = replace(self, **top)
        if grid_changes:
            out = replace(out, grid=replace(out.grid, **grid_changes))
        return out
