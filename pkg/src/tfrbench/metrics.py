"""Whole-domain, component and boundary-band error metrics."""
from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from typing import Sequence

import numpy as np

from .errors import DimensionError, EmptyListError

METRIC_NAMES = ("mae", "maxae", "cmae", "mcae", "bmae")


@dataclass(frozen=True)
class RegionMasks:
    omega: np.ndarray
    omega_c: np.ndarray
    omega_b: np.ndarray
    boundary_width: int = 1


@dataclass(frozen=True)
class MetricsReport:
    mae: float
    maxae: float
    cmae: float
    mcae: float
    bmae: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def __iter__(self):
        return iter(astuple(self))


def build_masks(layout: np.ndarray, w_b: int = 1) -> RegionMasks:
    layout = np.asarray(layout)
    if layout.ndim != 2 or layout.shape[0] != layout.shape[1]:
        raise DimensionError(f"layout must be square, got {layout.shape}")
    n = layout.shape[0]
    if w_b < 1 or 2 * w_b >= n:
        raise DimensionError(f"boundary width {w_b} invalid for N={n}")
    omega_b = np.ones((n, n), dtype=bool)
    omega_b[w_b:n - w_b, w_b:n - w_b] = False
    return RegionMasks(omega=np.ones((n, n), dtype=bool), omega_c=layout > 0,
                       omega_b=omega_b, boundary_width=w_b)


def evaluate(pred: np.ndarray, truth: np.ndarray, masks: RegionMasks) -> MetricsReport:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.shape != masks.omega.shape:
        raise DimensionError(
            f"shapes disagree: pred {pred.shape}, truth {truth.shape}, masks {masks.omega.shape}")
    err = np.abs(pred - truth)
    comp = err[masks.omega_c]
    if comp.size == 0:
        raise DimensionError("component mask is empty")
    return MetricsReport(
        mae=float(err.mean()),
        maxae=float(err.max()),
        cmae=float(comp.mean()),
        mcae=float(comp.max()),
        bmae=float(err[masks.omega_b].mean()),
    )


def aggregate(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Field-wise mean over samples (MaxAE is the mean of per-sample maxima)."""
    if len(reports) == 0:
        raise EmptyListError("cannot aggregate an empty list of reports")
    table = np.array([tuple(r) for r in reports], dtype=float)
    return MetricsReport(*(float(v) for v in table.mean(axis=0)))
