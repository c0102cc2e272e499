"""Per-instance regression baselines: bivariate polynomial least squares and GP (Kriging) mean."""
from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist, pdist

from ..errors import EmptyMonitorError, FactorizationError, RankWarning, ValidationError
from ..observation import MonitorSet


def monomial_exponents(degree: int) -> list[tuple[int, int]]:
    """``(i, j)`` exponents of ``x**i * y**j`` with ``i + j <= degree``, graded order."""
    return [(t - j, j) for t in range(degree + 1) for j in range(t + 1)]


def design_matrix(xy: np.ndarray, degree: int) -> np.ndarray:
    x, y = xy[:, 0], xy[:, 1]
    return np.column_stack([x ** i * y ** j for i, j in monomial_exponents(degree)])


def fit_predict_poly(obs, monitors: MonitorSet, queries, degree: int = 5,
                     side_length: float = 0.1) -> np.ndarray:
    obs = np.asarray(obs, dtype=float)
    if len(monitors) == 0:
        raise EmptyMonitorError("polynomial fit needs at least one monitor")
    if degree < 0:
        raise ValidationError("degree must be >= 0")
    V = design_matrix(monitors.coords / side_length, degree)
    coef, _, rank, _ = np.linalg.lstsq(V, obs, rcond=None)
    if rank < V.shape[1]:
        warnings.warn(f"design matrix has rank {rank} < {V.shape[1]} coefficients; "
                      "using the minimum-norm solution", RankWarning, stacklevel=2)
    q = np.atleast_2d(np.asarray(queries, dtype=float)) / side_length
    return design_matrix(q, degree) @ coef


def rbf_kernel(a: np.ndarray, b: np.ndarray, length_scale: float) -> np.ndarray:
    return np.exp(-cdist(a, b, "sqeuclidean") / (2.0 * length_scale ** 2))


def median_length_scale(monitors: MonitorSet, side_length: float = 0.1) -> float:
    p = monitors.coords / side_length
    return float(np.median(pdist(p))) if len(monitors) > 1 else 1.0


def fit_predict_gpr(obs, monitors: MonitorSet, queries, length_scale=0.2,
                    jitter: float = 1e-8, side_length: float = 0.1,
                    max_escalations: int = 3) -> np.ndarray:
    """Posterior mean of a zero-mean GP with RBF covariance on centered data.

    ``length_scale`` is in normalized units or the string ``"median"``.
    Jitter is multiplied by 10 up to ``max_escalations`` times when the
    Cholesky factorization fails.
    """
    obs = np.asarray(obs, dtype=float)
    if len(monitors) == 0:
        raise EmptyMonitorError("GPR needs at least one monitor")
    if length_scale == "median":
        length_scale = median_length_scale(monitors, side_length)
    p = monitors.coords / side_length
    K = rbf_kernel(p, p, length_scale)
    mean = obs.mean()
    y = obs - mean
    nugget = jitter
    for attempt in range(max_escalations + 1):
        try:
            factor = cho_factor(K + nugget * np.eye(K.shape[0]), lower=True)
            break
        except LinAlgError:
            if attempt == max_escalations:
                raise FactorizationError(
                    f"kernel matrix not positive definite with jitter {nugget:g}") from None
            nugget *= 10.0
    alpha = cho_solve(factor, y)
    q = np.atleast_2d(np.asarray(queries, dtype=float)) / side_length
    return rbf_kernel(q, p, length_scale) @ alpha + mean
