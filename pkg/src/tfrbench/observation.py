"""Monitoring points: placement, readout and the derived input representations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, PlacementError
from .layout import AMBIENT, SystemSpec, rasterize

ROLES = ("on_boundary", "on_component", "between_components")
EDGE_FRACTIONS = (0.25, 0.5, 0.75)
N_BETWEEN = 10


@dataclass(frozen=True)
class MonitorSet:
    """Ordered sensor cells.

    ``cells[m] = (row, col)``; ``roles[m]`` is one of :data:`ROLES`;
    ``source[m]`` is the 1-based source index for ``on_component`` monitors
    and 0 otherwise; ``coords[m] = (x, y)`` is the cell center in meters.
    """

    cells: np.ndarray
    roles: tuple
    source: np.ndarray
    coords: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64).reshape(-1, 2)
        coords = np.asarray(self.coords, dtype=float).reshape(-1, 2)
        source = np.asarray(self.source, dtype=np.int64).reshape(-1)
        m = cells.shape[0]
        if len(self.roles) != m or coords.shape[0] != m or source.shape[0] != m:
            raise DimensionError("cells, roles, source and coords must align")
        for arr in (cells, coords, source):
            arr.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "roles", tuple(self.roles))

    def __len__(self):
        return self.cells.shape[0]

    @property
    def rows(self) -> np.ndarray:
        return self.cells[:, 0]

    @property
    def cols(self) -> np.ndarray:
        return self.cells[:, 1]

    def role_counts(self) -> dict:
        return {r: self.roles.count(r) for r in ROLES}

    @classmethod
    def from_cells(cls, cells, h: float, roles=None, source=None) -> "MonitorSet":
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
        m = cells.shape[0]
        coords = np.column_stack([(cells[:, 1] + 0.5) * h, (cells[:, 0] + 0.5) * h])
        return cls(cells=cells,
                   roles=tuple(roles) if roles is not None else ("between_components",) * m,
                   source=np.zeros(m, dtype=np.int64) if source is None else source,
                   coords=coords)

    def to_dict(self) -> dict:
        return {
            "cells": self.cells.tolist(),
            "roles": list(self.roles),
            "source": self.source.tolist(),
            "coords": self.coords.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MonitorSet":
        return cls(cells=np.asarray(d["cells"], dtype=np.int64).reshape(-1, 2),
                   roles=tuple(d["roles"]), source=np.asarray(d["source"], dtype=np.int64),
                   coords=np.asarray(d["coords"], dtype=float).reshape(-1, 2))


def _boundary_cells(n: int) -> list[tuple[int, int]]:
    cells = []
    for frac in EDGE_FRACTIONS:
        k = min(int(frac * n), n - 1)
        cells += [(0, k), (k, n - 1), (n - 1, k), (k, 0)]
    # group by edge: bottom, right, top, left
    return sorted(cells, key=lambda c: (
        0 if c[0] == 0 else 1 if c[1] == n - 1 else 2 if c[0] == n - 1 else 3, c))


def place_monitors(spec: SystemSpec, layout: Optional[np.ndarray] = None,
                   rng_seed: int = 0, n_between: int = N_BETWEEN) -> MonitorSet:
    """Deterministic monitor layout: 3 per edge, 1 per source, ``n_between`` in the gaps.

    Edge monitors sit in the boundary-adjacent cell at 1/4, 1/2 and 3/4 of
    each edge.  Source monitors take the cell containing each source center.
    Gap monitors are chosen greedily among interior background cells, each
    maximizing its distance to every monitor already placed; the seed only
    decides between equally distant candidates.
    """
    n = spec.domain.grid_n
    h = spec.domain.h
    labels = rasterize(spec) if layout is None else np.asarray(layout)
    if labels.shape != (n, n):
        raise DimensionError(f"layout shape {labels.shape} does not match N={n}")

    cells = _boundary_cells(n)
    roles = ["on_boundary"] * len(cells)
    source = [0] * len(cells)
    for k, src in enumerate(spec.sources, 1):
        x0, y0 = src.center
        cells.append((min(int(y0 / h), n - 1), min(int(x0 / h), n - 1)))
        roles.append("on_component")
        source.append(k)
    if len(set(cells)) != len(cells):
        raise PlacementError("boundary and component monitors collide on the same cell")

    candidate = labels == 0
    candidate[0, :] = candidate[-1, :] = candidate[:, 0] = candidate[:, -1] = False
    for r, c in cells:
        candidate[r, c] = False
    cand = np.argwhere(candidate)
    if cand.shape[0] < n_between:
        raise PlacementError(
            f"only {cand.shape[0]} background cells available for {n_between} monitors")
    order = np.random.default_rng(rng_seed).permutation(cand.shape[0])
    cand = cand[order].astype(float)
    placed = np.asarray(cells, dtype=float)
    d2 = ((cand[:, None, :] - placed[None, :, :]) ** 2).sum(-1).min(axis=1)
    for _ in range(n_between):
        j = int(np.argmax(d2))  # first maximum in permuted order
        pick = cand[j].copy()
        cells.append((int(pick[0]), int(pick[1])))
        roles.append("between_components")
        source.append(0)
        d2 = np.minimum(d2, ((cand - pick) ** 2).sum(-1))
        d2[j] = -1.0
    return MonitorSet.from_cells(cells, h, roles=roles, source=np.asarray(source))


def observe(field: np.ndarray, monitors: MonitorSet, *, noise_std: float = 0.0,
            rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Temperatures at the monitor cells, optionally with additive Gaussian noise."""
    field = np.asarray(field)
    if field.ndim != 2 or field.shape[0] != field.shape[1]:
        raise DimensionError(f"expected a square field, got {field.shape}")
    if len(monitors) and monitors.cells.max() >= field.shape[0]:
        raise DimensionError("monitor cell outside the field")
    obs = field[monitors.rows, monitors.cols].astype(float)
    if noise_std > 0:
        rng = np.random.default_rng() if rng is None else rng
        obs = obs + rng.normal(0.0, noise_std, obs.shape)
    return obs


def to_monitor_matrix(obs: Sequence[float], monitors: MonitorSet, n: int,
                      fill: float = AMBIENT) -> np.ndarray:
    """Full-grid image: observed values at monitor cells, ``fill`` elsewhere."""
    obs = np.asarray(obs, dtype=float)
    if obs.shape != (len(monitors),):
        raise DimensionError(f"{obs.shape[0] if obs.ndim else 0} values for {len(monitors)} monitors")
    mat = np.full((n, n), float(fill))
    if len(monitors):
        if monitors.cells.max() >= n or monitors.cells.min() < 0:
            raise DimensionError("monitor cell outside the grid")
        mat[monitors.rows, monitors.cols] = obs
    return mat


def tile_pois(n: int, tile: int = 50) -> list[np.ndarray]:
    """Partition the grid into ``tile x tile`` blocks of flat cell indices (row-major block order)."""
    if tile < 1 or n % tile:
        raise DimensionError(f"tile {tile} does not divide N={n}")
    idx = np.arange(n * n).reshape(n, n)
    return [idx[r:r + tile, c:c + tile].ravel()
            for r in range(0, n, tile) for c in range(0, n, tile)]
