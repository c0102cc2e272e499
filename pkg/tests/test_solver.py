import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfrbench.errors import ConvergenceError, SingularSystemError
from tfrbench.layout import DomainSpec, EdgeCondition, HeatSource, SystemSpec, builtin_layout
from tfrbench.solver import (SolverConfig, assemble, boundary_heat_flux, heat_generation, pcg,
                             residual_norm, solve_density, solve_field)

from conftest import dirichlet_box

SRC = HeatSource("rectangle", "uniform", (0.05, 0.05), 0.02, 0.02)


def slab(n, left=300.0, right=298.0):
    edges = (EdgeCondition.adiabatic(), EdgeCondition.dirichlet(right),
             EdgeCondition.adiabatic(), EdgeCondition.dirichlet(left))
    return SystemSpec(DomainSpec(0.1, n), (SRC,), edges)


def dense_reference(spec, phi):
    """Textbook cell-by-cell assembly with explicit ghost cells, solved densely."""
    n, h, lam = spec.domain.grid_n, spec.domain.h, spec.domain.conductivity
    L = spec.domain.side_length
    A = np.zeros((n * n, n * n))
    b = phi.ravel() * h * h
    edges = dict(zip(("bottom", "right", "top", "left"), spec.edges))
    for r in range(n):
        for c in range(n):
            p = r * n + c
            for dr, dc, edge, s in ((-1, 0, "bottom", (c + .5) * h), (1, 0, "top", (c + .5) * h),
                                    (0, -1, "left", (r + .5) * h), (0, 1, "right", (r + .5) * h)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < n and 0 <= cc < n:
                    A[p, p] += lam
                    A[p, rr * n + cc] -= lam
                    continue
                e = edges[edge]
                if e.kind in ("dirichlet_const", "dirichlet_sine") or (
                        e.kind == "sink" and e.sink_span(L)[0] <= s <= e.sink_span(L)[1]):
                    g, tb = 2 * lam, float(e.temperature(np.array(s), L))
                elif e.kind == "robin":
                    g, tb = 2 * lam * e.htc * h / (2 * lam + e.htc * h), e.T0
                else:
                    continue
                A[p, p] += g
                b[p] += g * tb
    return np.linalg.solve(A, b).reshape(n, n)


def test_three_by_three_constant_dirichlet():
    spec = dirichlet_box(3, sources=(HeatSource("rectangle", "uniform", (0.05, 0.05), 0.02, 0.02),))
    A, b = assemble(spec, [0.0])
    # b holds only boundary terms: 2*lambda*298 per boundary face
    faces = np.array([2, 1, 2, 1, 0, 1, 2, 1, 2])
    np.testing.assert_allclose(b, faces * 2.0 * 298.0)
    np.testing.assert_allclose(solve_field(spec, [0.0]), 298.0, atol=1e-10)
    np.testing.assert_allclose(A.toarray(), A.toarray().T)
    assert np.all(np.linalg.eigvalsh(A.toarray()) > 0)


@pytest.mark.parametrize("method", ["conjugate_gradient", "direct"])
def test_linear_profile(method):
    n = 40
    T = solve_field(slab(n), [0.0], SolverConfig(method=method))
    x = (np.arange(n) + 0.5) / n
    exact = 300.0 - 2.0 * x  # x in units of L
    assert np.abs(T - exact[None, :]).max() <= 1e-8


def test_singular_system():
    spec = SystemSpec.__new__(SystemSpec)
    object.__setattr__(spec, "domain", DomainSpec(0.1, 8))
    object.__setattr__(spec, "sources", (SRC,))
    object.__setattr__(spec, "edges", (EdgeCondition.adiabatic(),) * 4)
    object.__setattr__(spec, "case_tag", "custom")
    with pytest.raises(SingularSystemError):
        assemble(spec, [1000.0])


def test_hsink_zero_power_is_ambient():
    T = solve_field(builtin_layout("HSink"), np.zeros(10))
    assert np.abs(T - 298.0).max() <= 1e-8


@pytest.mark.parametrize("case", ["HSink", "ADlet", "DSine"])
def test_matches_dense_ghost_cell_reference(case):
    spec = builtin_layout(case, grid_n=20)
    q = np.linspace(1000, 20000, spec.n_sources)
    from tfrbench.layout import power_field
    ref = dense_reference(spec, power_field(spec, q))
    for method in ("conjugate_gradient", "direct"):
        T = solve_field(spec, q, SolverConfig(method=method))
        np.testing.assert_allclose(T, ref, rtol=0, atol=1e-7)


def test_robin_against_dense_reference():
    edges = (EdgeCondition.robin(50.0, 290.0), EdgeCondition.adiabatic(),
             EdgeCondition.dirichlet(300.0), EdgeCondition.robin(10.0))
    spec = SystemSpec(DomainSpec(0.1, 16), (SRC,), edges)
    from tfrbench.layout import power_field
    ref = dense_reference(spec, power_field(spec, [5000.0]))
    np.testing.assert_allclose(solve_field(spec, [5000.0]), ref, atol=1e-8)


def test_robin_one_dimensional_limit():
    # adiabatic top/bottom, Dirichlet left, Robin right: exact linear solution
    lam, htc, Tl, Ta, n = 1.0, 20.0, 320.0, 300.0, 50
    edges = (EdgeCondition.adiabatic(), EdgeCondition.robin(htc, Ta),
             EdgeCondition.adiabatic(), EdgeCondition.dirichlet(Tl))
    spec = SystemSpec(DomainSpec(0.1, n, lam), (SRC,), edges)
    T = solve_field(spec, [0.0])
    # flux balance: lam (Tl - Tr)/L = htc (Tr - Ta)
    L = 0.1
    Tr = (lam / L * Tl + htc * Ta) / (lam / L + htc)
    x = (np.arange(n) + 0.5) / n * L
    np.testing.assert_allclose(T[n // 2], Tl + (Tr - Tl) * x / L, atol=1e-8)


def manufactured_error(n, method="conjugate_gradient"):
    spec = dirichlet_box(n)
    L = spec.domain.side_length
    x = (np.arange(n) + 0.5) * L / n
    X, Y = np.meshgrid(x, x)
    bump = np.sin(np.pi * X / L) * np.sin(np.pi * Y / L)
    T = solve_density(spec, 2.0 * (np.pi / L) ** 2 * bump, SolverConfig(method=method))
    return np.abs(T - (298.0 + bump)).max()


def test_manufactured_solution_second_order():
    errs = [manufactured_error(n) for n in (16, 32, 64)]
    for a, b in zip(errs, errs[1:]):
        assert 3.4 <= a / b <= 4.6


def test_conservation_on_every_case():
    for case in ("HSink", "ADlet", "DSine"):
        spec = builtin_layout(case, grid_n=48)
        q = np.full(spec.n_sources, 15000.0)
        T = solve_field(spec, q)
        if case == "HSink":
            gen = heat_generation(spec, q)
            assert abs(gen - boundary_heat_flux(spec, T)) <= 1e-8 * gen
        assert residual_norm(spec, q, T) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0, 30000), min_size=10, max_size=10),
       st.lists(st.floats(0, 30000), min_size=10, max_size=10))
def test_superposition(q1, q2):
    spec = builtin_layout("ADlet", grid_n=24)
    q1, q2 = np.array(q1), np.array(q2)
    cfg = SolverConfig(rel_tol=1e-13)
    z = solve_field(spec, np.zeros(10), cfg)
    lhs = solve_field(spec, q1, cfg) + solve_field(spec, q2, cfg) - z
    rhs = solve_field(spec, q1 + q2, cfg, check_range=False)
    assert np.abs(lhs - rhs).max() <= 1e-7


def test_maximum_principle_zero_source():
    edges = (EdgeCondition.dirichlet(290.0), EdgeCondition.dirichlet(305.0),
             EdgeCondition.sine(298.0, 10.0), EdgeCondition.dirichlet(300.0))
    spec = SystemSpec(DomainSpec(0.1, 32), (SRC,), edges)
    T = solve_field(spec, [0.0])
    assert T.min() >= 290.0 - 1e-9 and T.max() <= 308.0 + 1e-9


def test_heated_all_dirichlet_stays_above_wall_temperature():
    spec = builtin_layout("ADlet", grid_n=32, sine_amplitude=0.0)
    T = solve_field(spec, np.full(10, 20000.0))
    assert T.min() >= 298.0 - 1e-8


def test_convergence_error_reports_residual():
    spec = builtin_layout("HSink", grid_n=32)
    with pytest.raises(ConvergenceError) as info:
        solve_field(spec, np.full(10, 10000.0), SolverConfig(max_iter=3))
    assert info.value.residual > 1e-10 and info.value.iterations == 3


def test_pcg_matches_dense_solve(rng):
    M = rng.normal(size=(30, 30))
    A = M @ M.T + 30 * np.eye(30)
    b = rng.normal(size=30)
    import scipy.sparse as sp
    x, it, rel = pcg(sp.csr_matrix(A), b, rel_tol=1e-12)
    np.testing.assert_allclose(x, np.linalg.solve(A, b), rtol=1e-9)
    assert rel <= 1e-12 and it <= 30 * 20


def test_deterministic():
    spec = builtin_layout("DSine", grid_n=40)
    q = np.arange(1, 13) * 1000.0
    assert solve_field(spec, q).tobytes() == solve_field(spec, q).tobytes()


def test_solver_config_validation():
    from tfrbench.errors import ValidationError
    with pytest.raises(ValidationError):
        SolverConfig(rel_tol=0.0)
    with pytest.raises(ValidationError):
        SolverConfig(method="multigrid")
    assert SolverConfig().iteration_limit(10) == 2000
