"""Experiment configuration (JSON) and its validation."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import ConfigError, TFRError
from ..layout import CASES, SystemSpec, builtin_layout
from ..reconstruct import KINDS, make_reconstructor
from ..sampling import STRATEGIES
from ..solver import SolverConfig


@dataclass
class ExperimentConfig:
    case: str = "HSink"
    grid_n: int = 64
    side_length: float = 0.1
    conductivity: float = 1.0
    sine_amplitude: float = 25.0
    solver: dict = field(default_factory=lambda: {"method": "conjugate_gradient", "rel_tol": 1e-10})
    monitor_seed: int = 0
    counts: dict = field(default_factory=dict)
    seed: int = 0
    baselines: list = field(default_factory=list)
    metrics: dict = field(default_factory=lambda: {"boundary_width": 1})
    out: str = "runs/default"
    threads: int = 1
    source: Optional[str] = None  # path the config was read from

    @classmethod
    def from_dict(cls, d: dict, source=None) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__ if f != "source"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d, source=None if source is None else str(source))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data, source=path)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("source")
        return d

    def validate(self) -> None:
        if self.case not in CASES and not self._case_path().is_file():
            raise ConfigError(f"unknown case {self.case!r}: expected one of {CASES} "
                              "or a path to a SystemSpec JSON file")
        for name, c in self.counts.items():
            if name not in STRATEGIES:
                raise ConfigError(f"unknown sample set {name!r} in counts")
            if not isinstance(c, int) or c < 0:
                raise ConfigError(f"count for {name} must be a non-negative integer")
        try:
            self.solver_config()
        except (TypeError, TFRError) as exc:
            raise ConfigError(f"bad solver settings: {exc}") from None
        seen = set()
        for b in self.baselines:
            kind = b.get("kind") if isinstance(b, dict) else None
            if kind not in KINDS:
                raise ConfigError(f"unknown baseline kind {kind!r}; choose from {KINDS}")
            if kind in seen:
                raise ConfigError(f"baseline {kind} listed twice")
            seen.add(kind)
            make_reconstructor(kind, **self.hyper(kind))
        w_b = self.metrics.get("boundary_width", 1)
        if not isinstance(w_b, int) or w_b < 1:
            raise ConfigError("metrics.boundary_width must be a positive integer")

    def _case_path(self) -> Path:
        p = Path(self.case)
        if not p.is_absolute() and self.source is not None:
            p = Path(self.source).parent / p
        return p

    def system_spec(self) -> SystemSpec:
        if self.case in CASES:
            try:
                return builtin_layout(self.case, grid_n=self.grid_n, side_length=self.side_length,
                                      conductivity=self.conductivity,
                                      sine_amplitude=self.sine_amplitude)
            except TFRError as exc:
                raise ConfigError(str(exc)) from None
        return SystemSpec.load(self._case_path())

    def solver_config(self) -> SolverConfig:
        return SolverConfig(**self.solver)

    def hyper(self, kind: str) -> dict:
        for b in self.baselines:
            if b["kind"] == kind:
                return {k: v for k, v in b.items() if k != "kind"}
        raise ConfigError(f"baseline {kind} not configured")

    @property
    def kinds(self) -> list[str]:
        return [b["kind"] for b in self.baselines]

    @property
    def boundary_width(self) -> int:
        return int(self.metrics.get("boundary_width", 1))
