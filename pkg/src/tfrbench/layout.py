"""Heat-source system descriptions and their rasterization onto the grid.

Grid convention used throughout the package: an ``N x N`` array indexed
``[row, col]`` with row 0 at the bottom edge (y = h/2) and column 0 at the
left edge (x = h/2).  Cell centers sit at ``((col + 0.5) h, (row + 0.5) h)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, OverlapError, RangeError, ValidationError

SHAPES = ("rectangle", "capsule", "circle")
POWER_MODELS = ("uniform", "gaussian")
EDGE_KINDS = ("dirichlet_const", "dirichlet_sine", "adiabatic", "robin", "sink")
EDGE_NAMES = ("bottom", "right", "top", "left")
CASES = ("HSink", "ADlet", "DSine")

MAX_INTENSITY = 30000.0  # W/m^2
AMBIENT = 298.0  # K


@dataclass(frozen=True)
class DomainSpec:
    side_length: float = 0.1
    grid_n: int = 200
    conductivity: float = 1.0

    def __post_init__(self):
        if not self.side_length > 0:
            raise ValidationError(f"side_length must be positive, got {self.side_length}")
        if int(self.grid_n) != self.grid_n or self.grid_n < 3:
            raise ValidationError(f"grid_n must be an integer >= 3, got {self.grid_n}")
        if not self.conductivity > 0:
            raise ValidationError(f"conductivity must be positive, got {self.conductivity}")
        object.__setattr__(self, "grid_n", int(self.grid_n))

    @property
    def h(self) -> float:
        return self.side_length / self.grid_n

    def cell_centers(self) -> np.ndarray:
        """1-D array of cell-center coordinates along either axis."""
        return (np.arange(self.grid_n) + 0.5) * self.h


@dataclass(frozen=True)
class HeatSource:
    shape: str
    power_model: str
    center: tuple[float, float]
    length: float
    width: float
    gauss_deviation: float = 1.0
    gauss_radius: Optional[float] = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValidationError(f"unknown shape {self.shape!r}")
        if self.power_model not in POWER_MODELS:
            raise ValidationError(f"unknown power model {self.power_model!r}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not (self.length > 0 and self.width > 0):
            raise ValidationError("heat source has zero area")
        if self.shape == "circle" and not math.isclose(self.length, self.width):
            raise ValidationError("circle sources need length == width")
        if self.gauss_deviation < 0:
            raise ValidationError("gauss_deviation must be >= 0")
        if self.power_model == "gaussian":
            if self.gauss_radius is None:
                object.__setattr__(self, "gauss_radius", max(self.length, self.width) / 2)
            elif not self.gauss_radius > 0:
                raise ValidationError("gauss_radius must be positive")

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        x0, y0 = self.center
        return (x0 - self.length / 2, x0 + self.length / 2,
                y0 - self.width / 2, y0 + self.width / 2)

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the footprint (boundary inclusive)."""
        dx = np.abs(x - self.center[0])
        dy = np.abs(y - self.center[1])
        if self.shape == "rectangle":
            return (dx <= self.length / 2) & (dy <= self.width / 2)
        if self.shape == "circle":
            r = self.length / 2
            return dx * dx + dy * dy <= r * r
        # capsule: distance to the core segment along the longer axis
        if self.length >= self.width:
            r, half = self.width / 2, self.length / 2 - self.width / 2
            along, across = dx, dy
        else:
            r, half = self.length / 2, self.width / 2 - self.length / 2
            along, across = dy, dx
        excess = np.maximum(along - half, 0.0)
        return excess * excess + across * across <= r * r

    def profile(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Power density per unit intensity at (x, y), ignoring the footprint."""
        if self.power_model == "uniform":
            return np.ones(np.broadcast(x, y).shape)
        d2 = (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2
        return np.exp(-self.gauss_deviation * d2 / self.gauss_radius ** 2)

    def to_dict(self) -> dict:
        return {
            "shape": self.shape,
            "power_model": self.power_model,
            "center": list(self.center),
            "length": self.length,
            "width": self.width,
            "gauss_deviation": self.gauss_deviation,
            "gauss_radius": self.gauss_radius,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HeatSource":
        return cls(shape=d["shape"], power_model=d["power_model"],
                   center=tuple(d["center"]), length=d["length"], width=d["width"],
                   gauss_deviation=d.get("gauss_deviation", 1.0),
                   gauss_radius=d.get("gauss_radius"))


@dataclass(frozen=True)
class EdgeCondition:
    """Boundary condition on one edge of the square domain.

    ``T0`` is the reference temperature for every non-adiabatic kind,
    ``Tm`` the sine amplitude, ``htc`` the convective coefficient for Robin
    edges, ``delta``/``offset`` the extent and start of a heat-sink segment
    measured along the edge.  ``offset=None`` centers the sink.
    """

    kind: str
    T0: float = AMBIENT
    Tm: float = 0.0
    htc: float = 0.0
    delta: float = 0.0
    offset: Optional[float] = None

    def __post_init__(self):
        if self.kind not in EDGE_KINDS:
            raise ValidationError(f"unknown edge kind {self.kind!r}")
        if self.kind == "robin" and not self.htc > 0:
            raise ValidationError("robin edges need htc > 0")
        if self.kind == "sink":
            if not self.delta > 0:
                raise ValidationError("sink width delta must be positive")
            if self.offset is not None and self.offset < 0:
                raise ValidationError("sink offset must be >= 0")

    @classmethod
    def dirichlet(cls, T0=AMBIENT):
        return cls("dirichlet_const", T0=T0)

    @classmethod
    def sine(cls, T0=AMBIENT, Tm=25.0):
        return cls("dirichlet_sine", T0=T0, Tm=Tm)

    @classmethod
    def adiabatic(cls):
        return cls("adiabatic")

    @classmethod
    def robin(cls, htc, T0=AMBIENT):
        return cls("robin", T0=T0, htc=htc)

    @classmethod
    def sink(cls, delta=0.01, T0=AMBIENT, offset=None):
        return cls("sink", T0=T0, delta=delta, offset=offset)

    def sink_span(self, L: float) -> tuple[float, float]:
        start = (L - self.delta) / 2 if self.offset is None else self.offset
        return start, start + self.delta

    def temperature(self, s: np.ndarray, L: float) -> np.ndarray:
        """Prescribed temperature at arc-length positions ``s`` (Dirichlet kinds)."""
        s = np.asarray(s, dtype=float)
        if self.kind == "dirichlet_sine":
            return self.Tm * np.sin(np.pi * s / L) + self.T0
        return np.full(s.shape, float(self.T0))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "T0": self.T0, "Tm": self.Tm, "htc": self.htc,
                "delta": self.delta, "offset": self.offset}

    @classmethod
    def from_dict(cls, d: dict) -> "EdgeCondition":
        return cls(kind=d["kind"], T0=d.get("T0", AMBIENT), Tm=d.get("Tm", 0.0),
                   htc=d.get("htc", 0.0), delta=d.get("delta", 0.0), offset=d.get("offset"))


@dataclass(frozen=True)
class SystemSpec:
    domain: DomainSpec
    sources: tuple[HeatSource, ...]
    edges: tuple[EdgeCondition, EdgeCondition, EdgeCondition, EdgeCondition]
    case_tag: Optional[str] = "custom"

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "edges", tuple(self.edges))
        if len(self.sources) < 1:
            raise ValidationError("a system needs at least one heat source")
        if len(self.edges) != 4:
            raise ValidationError("exactly four edges (bottom, right, top, left) are required")
        if all(e.kind == "adiabatic" for e in self.edges):
            raise ValidationError("at least one edge must be non-adiabatic")
        L = self.domain.side_length
        eps = 1e-12 * L
        for i, src in enumerate(self.sources, 1):
            x_lo, x_hi, y_lo, y_hi = src.bbox
            if x_lo < -eps or y_lo < -eps or x_hi > L + eps or y_hi > L + eps:
                raise ValidationError(f"source {i} footprint leaves the domain")
        for name, e in zip(EDGE_NAMES, self.edges):
            if e.kind == "sink":
                lo, hi = e.sink_span(L)
                if lo < -eps or hi > L + eps:
                    raise ValidationError(f"sink on {name} edge extends past the domain")

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    def to_dict(self) -> dict:
        return {
            "case_tag": self.case_tag,
            "domain": {"side_length": self.domain.side_length,
                       "grid_n": self.domain.grid_n,
                       "conductivity": self.domain.conductivity},
            "sources": [s.to_dict() for s in self.sources],
            "edges": {name: e.to_dict() for name, e in zip(EDGE_NAMES, self.edges)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SystemSpec":
        edges = d["edges"]
        if isinstance(edges, dict):
            edges = [edges[name] for name in EDGE_NAMES]
        return cls(domain=DomainSpec(**d["domain"]),
                   sources=tuple(HeatSource.from_dict(s) for s in d["sources"]),
                   edges=tuple(EdgeCondition.from_dict(e) for e in edges),
                   case_tag=d.get("case_tag", "custom"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SystemSpec":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "SystemSpec":
        return cls.from_json(Path(path).read_text())


# (type code, length, width, (x, y)) rows; U/N = uniform/gaussian, r/p/c = rectangle/capsule/circle
_TYPE_A = [
    ("Ur", 0.012, 0.012, (0.019, 0.0915)),
    ("Ur", 0.016, 0.03, (0.0875, 0.079)),
    ("Ur", 0.015, 0.015, (0.045, 0.0145)),
    ("Ur", 0.03, 0.03, (0.08, 0.025)),
    ("Ur", 0.02, 0.02, (0.0685, 0.0885)),
    ("Up", 0.03, 0.015, (0.036, 0.0335)),
    ("Up", 0.02, 0.04, (0.021, 0.0655)),
    ("Up", 0.015, 0.03, (0.0425, 0.0795)),
    ("Up", 0.02, 0.03, (0.06, 0.055)),
    ("Up", 0.03, 0.02, (0.022, 0.014)),
]
_TYPE_B = [
    ("Ur", 0.015, 0.015, (0.016, 0.0915)),
    ("Ur", 0.01, 0.02, (0.0925, 0.079)),
    ("Ur", 0.02, 0.03, (0.0825, 0.025)),
    ("Up", 0.015, 0.02, (0.0725, 0.0835)),
    ("Up", 0.015, 0.03, (0.036, 0.0335)),
    ("Up", 0.03, 0.015, (0.021, 0.0655)),
    ("Nc", 0.02, 0.02, (0.0465, 0.0795)),
    ("Nc", 0.028, 0.028, (0.06, 0.055)),
    ("Nc", 0.02, 0.02, (0.017, 0.014)),
    ("Nc", 0.024, 0.024, (0.055, 0.014)),
]
_TYPE_C = [
    ("Nr", 0.016, 0.012, (0.019, 0.0915)),
    ("Nr", 0.012, 0.015, (0.0875, 0.079)),
    ("Nr", 0.024, 0.024, (0.045, 0.0145)),
    ("Nr", 0.012, 0.024, (0.08, 0.025)),
    ("Nr", 0.015, 0.012, (0.0685, 0.0885)),
    ("Nr", 0.012, 0.024, (0.036, 0.04)),
    ("Nr", 0.018, 0.018, (0.015, 0.0655)),
    ("Nr", 0.024, 0.012, (0.0425, 0.0795)),
    ("Nr", 0.012, 0.012, (0.06, 0.055)),
    ("Nr", 0.018, 0.018, (0.017, 0.014)),
    ("Nr", 0.018, 0.012, (0.036, 0.061)),
    ("Nr", 0.018, 0.009, (0.061, 0.04)),
]
_CODE_MODEL = {"U": "uniform", "N": "gaussian"}
_CODE_SHAPE = {"r": "rectangle", "p": "capsule", "c": "circle"}


def _table_sources(rows, scale: float, gauss_deviation: float) -> tuple[HeatSource, ...]:
    return tuple(
        HeatSource(shape=_CODE_SHAPE[code[1]], power_model=_CODE_MODEL[code[0]],
                   center=(x * scale, y * scale), length=length * scale, width=width * scale,
                   gauss_deviation=gauss_deviation)
        for code, length, width, (x, y) in rows
    )


def builtin_layout(case: str, *, grid_n: int = 200, side_length: float = 0.1,
                   conductivity: float = 1.0, sine_amplitude: float = 25.0,
                   sine_edge: str = "top", sink_edge: str = "bottom",
                   sink_width: float = 0.01, sink_offset: Optional[float] = None,
                   gauss_deviation: float = 1.0, T0: float = AMBIENT) -> SystemSpec:
    """Return one of the three reference systems (HSink, ADlet, DSine).

    Source geometry is defined on a 0.1 m square; a different ``side_length``
    scales it (and the sink width) proportionally.
    """
    if case not in CASES:
        raise ValidationError(f"unknown case {case!r}; expected one of {CASES}")
    scale = side_length / 0.1
    domain = DomainSpec(side_length=side_length, grid_n=grid_n, conductivity=conductivity)
    if case == "HSink":
        sources = _table_sources(_TYPE_A, scale, gauss_deviation)
        edges = {name: EdgeCondition.adiabatic() for name in EDGE_NAMES}
        edges[sink_edge] = EdgeCondition.sink(delta=sink_width * scale, T0=T0, offset=sink_offset)
    elif case == "ADlet":
        sources = _table_sources(_TYPE_B, scale, gauss_deviation)
        edges = {name: EdgeCondition.dirichlet(T0) for name in EDGE_NAMES}
        edges[sine_edge] = EdgeCondition.sine(T0=T0, Tm=sine_amplitude)
    else:
        sources = _table_sources(_TYPE_C, scale, gauss_deviation)
        edges = {name: EdgeCondition.adiabatic() for name in EDGE_NAMES}
        edges[sine_edge] = EdgeCondition.sine(T0=T0, Tm=sine_amplitude)
    return SystemSpec(domain=domain, sources=sources,
                      edges=tuple(edges[name] for name in EDGE_NAMES), case_tag=case)


def grid_coordinates(domain: DomainSpec) -> tuple[np.ndarray, np.ndarray]:
    """Cell-center ``(X, Y)`` arrays of shape ``(N, N)`` in the row/col convention."""
    c = domain.cell_centers()
    X, Y = np.meshgrid(c, c)  # X varies along columns, Y along rows
    return X, Y


@lru_cache(maxsize=32)
def rasterize(spec: SystemSpec) -> np.ndarray:
    """Label each cell with the 1-based index of the source covering its center.

    Returns a read-only ``int32`` array; background cells are 0.
    """
    X, Y = grid_coordinates(spec.domain)
    labels = np.zeros(X.shape, dtype=np.int32)
    for k, src in enumerate(spec.sources, 1):
        inside = src.contains(X, Y)
        if not inside.any():
            raise ValidationError(
                f"source {k} covers no cell center at N={spec.domain.grid_n}")
        clash = inside & (labels > 0)
        if clash.any():
            other = int(labels[clash][0])
            raise OverlapError(f"sources {other} and {k} overlap on {int(clash.sum())} cells")
        labels[inside] = k
    labels.flags.writeable = False
    return labels


@lru_cache(maxsize=32)
def _unit_profile(spec: SystemSpec) -> np.ndarray:
    X, Y = grid_coordinates(spec.domain)
    labels = rasterize(spec)
    prof = np.zeros(X.shape)
    for k, src in enumerate(spec.sources, 1):
        m = labels == k
        prof[m] = src.profile(X[m], Y[m])
    prof.flags.writeable = False
    return prof


def power_field(spec: SystemSpec, q: Sequence[float], *, check_range: bool = True) -> np.ndarray:
    """Volumetric heat generation (W/m^2 in 2-D) at every cell center."""
    q = np.asarray(q, dtype=float)
    if q.shape != (spec.n_sources,):
        raise DimensionError(f"expected {spec.n_sources} intensities, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise RangeError("intensities must be finite")
    if check_range and (q.min() < 0 or q.max() > MAX_INTENSITY):
        raise RangeError(f"intensities must lie in [0, {MAX_INTENSITY:g}] W/m^2")
    labels = rasterize(spec)
    padded = np.concatenate(([0.0], q))
    return padded[labels] * _unit_profile(spec)
