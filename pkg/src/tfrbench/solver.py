"""Cell-centered finite-volume solver for steady 2-D heat conduction.

Discretizes ``-div(k grad T) = phi`` on the uniform ``N x N`` grid of a
:class:`~tfrbench.layout.SystemSpec`.  Each cell balances the heat flowing
through its four faces against ``phi * h**2``; interior faces carry a
conductance of ``k`` (face length ``h`` over center distance ``h``).
Boundary faces use ghost-cell elimination with the boundary data taken at
the face midpoint:

* Dirichlet: conductance ``2k`` towards the prescribed value,
* adiabatic: no flux,
* Robin ``-k dT/dn = htc (T - T0)``: conductance ``2 k htc h / (2k + htc h)``
  towards ``T0``,
* sink: Dirichlet on faces whose midpoint lies in the sink segment,
  adiabatic elsewhere on that edge.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, DimensionError, SingularSystemError, ValidationError
from .layout import EDGE_NAMES, SystemSpec, power_field

log = logging.getLogger(__name__)

SOLVER_METHODS = ("conjugate_gradient", "direct")


@dataclass(frozen=True)
class SolverConfig:
    method: str = "conjugate_gradient"
    rel_tol: float = 1e-10
    max_iter: Optional[int] = None  # None -> 20 * N**2

    def __post_init__(self):
        if self.method not in SOLVER_METHODS:
            raise ValidationError(f"unknown solver method {self.method!r}")
        if not self.rel_tol > 0:
            raise ValidationError("rel_tol must be positive")

    def iteration_limit(self, n: int) -> int:
        return 20 * n * n if self.max_iter is None else int(self.max_iter)

    def to_dict(self) -> dict:
        return {"method": self.method, "rel_tol": self.rel_tol, "max_iter": self.max_iter}


@dataclass(frozen=True)
class BoundaryFaces:
    """Flat description of every boundary face that exchanges heat."""

    cells: np.ndarray        # flat cell index adjacent to the face
    conductance: np.ndarray  # W/K per unit depth
    temperature: np.ndarray  # K, value the face pulls towards
    edge: np.ndarray         # index into EDGE_NAMES


def _edge_cells(n: int, edge: str) -> np.ndarray:
    k = np.arange(n)
    if edge == "bottom":
        return k
    if edge == "top":
        return (n - 1) * n + k
    if edge == "left":
        return k * n
    return k * n + (n - 1)


@lru_cache(maxsize=32)
def boundary_faces(spec: SystemSpec) -> BoundaryFaces:
    dom = spec.domain
    n, h, lam, L = dom.grid_n, dom.h, dom.conductivity, dom.side_length
    s = dom.cell_centers()  # face midpoints along any edge
    cells, cond, temp, edge_id = [], [], [], []
    for e_idx, (name, edge) in enumerate(zip(EDGE_NAMES, spec.edges)):
        if edge.kind == "adiabatic":
            continue
        idx = _edge_cells(n, name)
        if edge.kind in ("dirichlet_const", "dirichlet_sine"):
            keep = np.ones(n, dtype=bool)
            g = np.full(n, 2.0 * lam)
            tb = edge.temperature(s, L)
        elif edge.kind == "robin":
            keep = np.ones(n, dtype=bool)
            g = np.full(n, 2.0 * lam * edge.htc * h / (2.0 * lam + edge.htc * h))
            tb = np.full(n, float(edge.T0))
        else:  # sink
            lo, hi = edge.sink_span(L)
            keep = (s >= lo) & (s <= hi)
            g = np.full(n, 2.0 * lam)
            tb = np.full(n, float(edge.T0))
        cells.append(idx[keep])
        cond.append(g[keep])
        temp.append(tb[keep])
        edge_id.append(np.full(int(keep.sum()), e_idx))
    if not cells or sum(len(c) for c in cells) == 0:
        raise SingularSystemError(
            "no Dirichlet or Robin boundary face: the steady problem is singular")
    faces = BoundaryFaces(np.concatenate(cells), np.concatenate(cond),
                          np.concatenate(temp), np.concatenate(edge_id))
    for arr in (faces.cells, faces.conductance, faces.temperature, faces.edge):
        arr.flags.writeable = False
    return faces


@lru_cache(maxsize=32)
def _operator(spec: SystemSpec):
    n = spec.domain.grid_n
    lam = spec.domain.conductivity
    faces = boundary_faces(spec)
    idx = np.arange(n * n).reshape(n, n)
    # interior faces: horizontal neighbours then vertical neighbours
    a = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    b = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    w = np.full(a.size, lam)
    diag = np.zeros(n * n)
    np.add.at(diag, a, w)
    np.add.at(diag, b, w)
    np.add.at(diag, faces.cells, faces.conductance)
    rows = np.concatenate([a, b, np.arange(n * n)])
    cols = np.concatenate([b, a, np.arange(n * n)])
    vals = np.concatenate([-w, -w, diag])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n * n, n * n))
    A.sum_duplicates()
    A.sort_indices()
    rhs_bc = np.zeros(n * n)
    np.add.at(rhs_bc, faces.cells, faces.conductance * faces.temperature)
    rhs_bc.flags.writeable = False
    return A, rhs_bc


def assemble(spec: SystemSpec, q, *, check_range: bool = True):
    """Return the sparse SPD system ``(A, b)`` for intensities ``q``.

    ``A`` is CSR of size ``N**2``; unknowns are flattened row-major with
    row 0 at the bottom edge.
    """
    A, rhs_bc = _operator(spec)
    phi = power_field(spec, q, check_range=check_range)
    b = rhs_bc + phi.ravel() * spec.domain.h ** 2
    return A, b


@lru_cache(maxsize=8)
def _factor(spec: SystemSpec):
    A, _ = _operator(spec)
    return spla.splu(A.tocsc(), permc_spec="COLAMD")


def pcg(A, b, x0=None, *, rel_tol=1e-10, max_iter=None):
    """Jacobi-preconditioned conjugate gradient for SPD ``A``.

    Stops when the true residual satisfies ``||b - A x|| <= rel_tol ||b||``.
    Returns ``(x, iterations, relative_residual)``.
    """
    n = b.shape[0]
    max_iter = 20 * n if max_iter is None else max_iter
    inv_diag = 1.0 / A.diagonal()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    target = rel_tol * bnorm
    r = b - A @ x
    it = 0
    while True:
        z = inv_diag * r
        p = z.copy()
        rz = r @ z
        while np.linalg.norm(r) > target and it < max_iter:
            Ap = A @ p
            alpha = rz / (p @ Ap)
            x += alpha * p
            r -= alpha * Ap
            z = inv_diag * r
            rz_new = r @ z
            p *= rz_new / rz
            p += z
            rz = rz_new
            it += 1
        # the recursive residual drifts; confirm with the true one and restart if needed
        r = b - A @ x
        res = np.linalg.norm(r)
        if res <= target or it >= max_iter:
            return x, it, res / bnorm


def solve_field(spec: SystemSpec, q, cfg: SolverConfig = SolverConfig(), *,
                check_range: bool = True) -> np.ndarray:
    """Steady temperature field (K) on the ``N x N`` cell-center grid."""
    return solve_density(spec, power_field(spec, q, check_range=check_range), cfg)


def solve_density(spec: SystemSpec, phi: np.ndarray, cfg: SolverConfig = SolverConfig()) -> np.ndarray:
    """Solve with an arbitrary power density ``phi`` (W/m^2, shape ``(N, N)``).

    The spec's sources are ignored; only its domain and edges are used.
    Handy for manufactured solutions.
    """
    n = spec.domain.grid_n
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (n, n):
        raise DimensionError(f"power density has shape {phi.shape}, expected {(n, n)}")
    A, rhs_bc = _operator(spec)
    src = phi.ravel() * spec.domain.h ** 2
    b = rhs_bc + src
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros((n, n))
    # Solve for the deviation from a reference temperature.  The ambient offset
    # then never enters the residual, which keeps the attainable accuracy at the
    # scale of the temperature rise rather than of ~300 K.
    faces = boundary_faces(spec)
    t_ref = float(np.average(faces.temperature, weights=faces.conductance))
    b_dev = src.copy()
    np.add.at(b_dev, faces.cells, faces.conductance * (faces.temperature - t_ref))
    if not b_dev.any():
        return np.full((n, n), t_ref)
    if cfg.method == "direct":
        y = _factor(spec).solve(b_dev)
        it, rel_dev = 0, np.linalg.norm(b_dev - A @ y) / np.linalg.norm(b_dev)
    else:
        y, it, rel_dev = pcg(A, b_dev, rel_tol=cfg.rel_tol, max_iter=cfg.iteration_limit(n))
    x = y + t_ref
    rel = np.linalg.norm(b - A @ x) / bnorm
    if max(rel, rel_dev) > cfg.rel_tol:
        what = "direct solve" if cfg.method == "direct" else f"PCG after {it} iterations"
        raise ConvergenceError(f"{what}: residual {max(rel, rel_dev):.3e} exceeds rel_tol "
                               f"{cfg.rel_tol:.1e}", residual=max(rel, rel_dev), iterations=it)
    log.debug("%s solve: %d iterations, relative residual %.2e", cfg.method, it, rel)
    return x.reshape(n, n)


def residual_norm(spec: SystemSpec, q, field: np.ndarray, *, check_range: bool = True) -> float:
    A, b = assemble(spec, q, check_range=check_range)
    return float(np.linalg.norm(b - A @ np.asarray(field).ravel()) / np.linalg.norm(b))


def heat_generation(spec: SystemSpec, q, *, check_range: bool = True) -> float:
    """Total generated heat ``sum(phi) h**2`` (W per unit depth)."""
    return float(power_field(spec, q, check_range=check_range).sum() * spec.domain.h ** 2)


def boundary_heat_flux(spec: SystemSpec, field: np.ndarray) -> float:
    """Net heat leaving through the boundary, using the same face conductances as the stencil."""
    faces = boundary_faces(spec)
    t_cell = np.asarray(field).ravel()[faces.cells]
    return float(np.sum(faces.conductance * (t_cell - faces.temperature)))
