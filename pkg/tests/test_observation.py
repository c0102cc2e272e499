import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfrbench.errors import DimensionError, PlacementError
from tfrbench.layout import HeatSource, builtin_layout, rasterize
from tfrbench.observation import MonitorSet, observe, place_monitors, tile_pois, to_monitor_matrix

from conftest import dirichlet_box


@pytest.mark.parametrize("case,total,comp", [("HSink", 32, 10), ("ADlet", 32, 10), ("DSine", 34, 12)])
@pytest.mark.parametrize("n", [64, 200])
def test_counts_and_roles(case, total, comp, n):
    spec = builtin_layout(case, grid_n=n)
    mon = place_monitors(spec)
    labels = rasterize(spec)
    assert len(mon) == total
    assert mon.role_counts() == {"on_boundary": 12, "on_component": comp, "between_components": 10}
    assert len({tuple(c) for c in mon.cells.tolist()}) == total
    between = np.array(mon.roles) == "between_components"
    assert np.all(labels[mon.rows[between], mon.cols[between]] == 0)
    # component monitors sit in the cell holding their source center, labelled with that source
    comp_idx = np.nonzero(np.array(mon.roles) == "on_component")[0]
    h = spec.domain.h
    for m, src in zip(comp_idx, spec.sources):
        x, y = src.center
        assert (mon.rows[m], mon.cols[m]) == (int(y / h), int(x / h))
        assert labels[mon.rows[m], mon.cols[m]] == mon.source[m]


def test_boundary_monitors_quarter_points():
    n = 64
    mon = place_monitors(builtin_layout("HSink", grid_n=n))
    cells = {tuple(c) for c, r in zip(mon.cells.tolist(), mon.roles) if r == "on_boundary"}
    expected = set()
    for k in (16, 32, 48):
        expected |= {(0, k), (k, n - 1), (n - 1, k), (k, 0)}
    assert cells == expected


def test_between_monitors_follow_greedy_maxmin():
    spec = builtin_layout("ADlet", grid_n=64)
    mon = place_monitors(spec, rng_seed=3)
    labels = rasterize(spec)
    n = 64
    cand = [(r, c) for r in range(1, n - 1) for c in range(1, n - 1) if labels[r, c] == 0]
    placed = [tuple(c) for c, r in zip(mon.cells.tolist(), mon.roles) if r != "between_components"]
    between = [tuple(c) for c, r in zip(mon.cells.tolist(), mon.roles) if r == "between_components"]
    for pick in between:
        def gap(c):
            return min((c[0] - p[0]) ** 2 + (c[1] - p[1]) ** 2 for p in placed)
        best = max(gap(c) for c in cand if c not in placed)
        assert gap(pick) == best
        placed.append(pick)


def test_placement_deterministic_and_seeded():
    spec = builtin_layout("DSine", grid_n=64)
    a, b = place_monitors(spec, rng_seed=9), place_monitors(spec, rng_seed=9)
    np.testing.assert_array_equal(a.cells, b.cells)


def test_placement_error_when_no_room():
    # the source covers every interior cell, leaving nowhere for gap monitors
    big = HeatSource("rectangle", "uniform", (0.05, 0.05), 0.07, 0.07)
    spec = dirichlet_box(6, sources=(big,))
    with pytest.raises(PlacementError):
        place_monitors(spec)


def test_observe_lookup_oracle():
    n = 64
    mon = place_monitors(builtin_layout("HSink", grid_n=n))
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    obs = observe((i + j).astype(float), mon)
    assert obs.tolist() == [float(r + c) for r, c in mon.cells.tolist()]
    np.testing.assert_array_equal(observe(np.full((n, n), 298.0), mon), 298.0)


def test_observe_noise_hook():
    mon = MonitorSet.from_cells([(1, 1), (2, 2)], 0.01)
    field = np.full((4, 4), 300.0)
    noisy = observe(field, mon, noise_std=0.5, rng=np.random.default_rng(0))
    assert np.all(noisy != 300.0)
    with pytest.raises(DimensionError):
        observe(np.zeros((2, 2)), mon)


def test_monitor_matrix_cases():
    mon = MonitorSet.from_cells([(1, 1)], 0.025)
    mat = to_monitor_matrix([300.0], mon, 4, fill=298.0)
    assert mat[1, 1] == 300.0 and (mat == 298.0).sum() == 15
    empty = MonitorSet.from_cells(np.zeros((0, 2)), 0.025)
    assert np.all(to_monitor_matrix([], empty, 4) == 298.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_monitor_matrix_round_trip(seed):
    rng = np.random.default_rng(seed)
    mon = place_monitors(builtin_layout("HSink", grid_n=64), rng_seed=int(seed))
    obs = rng.uniform(290, 400, len(mon))
    np.testing.assert_array_equal(observe(to_monitor_matrix(obs, mon, 64), mon), obs)


def test_tiles():
    blocks = tile_pois(200, 50)
    assert len(blocks) == 16 and all(b.size == 2500 for b in blocks)
    allidx = np.concatenate(blocks)
    assert np.array_equal(np.sort(allidx), np.arange(40000))
    assert len(tile_pois(4, 4)) == 1 and tile_pois(4, 4)[0].size == 16
    # row-major block order: second block starts at column 50 of row 0
    assert blocks[1][0] == 50 and blocks[4][0] == 50 * 200
    with pytest.raises(DimensionError):
        tile_pois(200, 60)


def test_monitor_set_serialization():
    mon = place_monitors(builtin_layout("ADlet", grid_n=64))
    again = MonitorSet.from_dict(mon.to_dict())
    np.testing.assert_array_equal(again.cells, mon.cells)
    np.testing.assert_array_equal(again.coords, mon.coords)
    assert again.roles == mon.roles
