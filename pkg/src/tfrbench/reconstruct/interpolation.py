"""Gaussian-weighted scattered-data interpolators (k-nearest and global).

Distances are measured in domain-normalized coordinates (meters divided by
the side length) and weighted by ``exp(-d**2 / length_scale**2)``; weights
are normalized over the monitors that take part.
"""
from __future__ import annotations

import numpy as np

from ..errors import EmptyMonitorError, ValidationError
from ..observation import MonitorSet


def _sq_dist(queries, points):
    diff = queries[:, None, :] - points[None, :, :]
    return np.einsum("qmk,qmk->qm", diff, diff)


def _weighted_average(obs, d2, mask, length_scale):
    """Normalized Gaussian average of ``obs`` over the ``mask``-selected monitors, row by row."""
    logits = np.where(mask, -d2 / length_scale ** 2, -np.inf)
    logits -= logits.max(axis=1, keepdims=True)  # shift cancels in the normalization
    w = np.exp(logits)
    pred = (w @ obs) / w.sum(axis=1)
    # the exact value is a convex combination; clip only removes rounding overshoot
    return np.clip(pred, obs.min(), obs.max())


def _prepare(obs, monitors, queries, side_length):
    obs = np.asarray(obs, dtype=float)
    if len(monitors) == 0 or obs.size == 0:
        raise EmptyMonitorError("interpolation needs at least one monitor")
    if obs.shape != (len(monitors),):
        raise ValidationError(f"{obs.size} observations for {len(monitors)} monitors")
    q = np.atleast_2d(np.asarray(queries, dtype=float)) / side_length
    p = monitors.coords / side_length
    return obs, _sq_dist(q, p)


def knn_interpolate(obs, monitors: MonitorSet, queries, k: int = 3,
                    length_scale: float = 0.1, side_length: float = 0.1) -> np.ndarray:
    """Gaussian-weighted average of the ``k`` nearest monitors (ties go to the lower index)."""
    obs, d2 = _prepare(obs, monitors, queries, side_length)
    m = obs.size
    if not 1 <= k <= m:
        raise ValidationError(f"k={k} must lie in [1, {m}]")
    # snap away rounding noise so geometrically equal distances really tie
    nearest = np.argsort(np.round(d2, 12), axis=1, kind="stable")[:, :k]
    mask = np.zeros(d2.shape, dtype=bool)
    np.put_along_axis(mask, nearest, True, axis=1)
    return _weighted_average(obs, d2, mask, length_scale)


def global_interpolate(obs, monitors: MonitorSet, queries, length_scale: float = 0.1,
                       side_length: float = 0.1) -> np.ndarray:
    """Gaussian-weighted average over all monitors."""
    obs, d2 = _prepare(obs, monitors, queries, side_length)
    return _weighted_average(obs, d2, np.ones(d2.shape, dtype=bool), length_scale)
