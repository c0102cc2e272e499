import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfrbench.errors import DimensionError, EmptyListError
from tfrbench.layout import builtin_layout, rasterize
from tfrbench.metrics import MetricsReport, aggregate, build_masks, evaluate

LAYOUT = rasterize(builtin_layout("HSink"))
MASKS = build_masks(LAYOUT)


def test_mask_sizes():
    assert build_masks(np.ones((4, 4), dtype=int)).omega_b.sum() == 12
    assert MASKS.omega_c.sum() == sum([576, 1920, 900, 3600, 1600, 1616, 2864, 1616, 2064, 2064])
    assert build_masks(LAYOUT, 3).omega_b.sum() == 200 ** 2 - 194 ** 2
    with pytest.raises(DimensionError):
        build_masks(np.ones((4, 4)), 2)
    with pytest.raises(DimensionError):
        build_masks(np.ones((4, 4)), 0)


def test_examples():
    t = np.full((200, 200), 300.0)
    assert tuple(evaluate(t, t, MASKS)) == (0, 0, 0, 0, 0)
    assert tuple(evaluate(t + 1, t, MASKS)) == (1, 1, 1, 1, 1)
    r, c = np.argwhere(LAYOUT == 4)[100]
    p = t.copy()
    p[r, c] += 5
    rep = evaluate(p, t, MASKS)
    assert (rep.maxae, rep.mcae, rep.mae, rep.bmae) == (5, 5, 5 / 40000, 0)


def reference(pred, truth, layout, w_b):
    """Loop-based evaluation of the five metrics."""
    n = truth.shape[0]
    all_e, comp, band = [], [], []
    for i in range(n):
        for j in range(n):
            e = abs(pred[i, j] - truth[i, j])
            all_e.append(e)
            if layout[i, j] > 0:
                comp.append(e)
            if min(i, j, n - 1 - i, n - 1 - j) < w_b:
                band.append(e)
    return (sum(all_e) / len(all_e), max(all_e), sum(comp) / len(comp), max(comp),
            sum(band) / len(band))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_against_loop_reference(seed, w_b):
    rng = np.random.default_rng(seed)
    n = 12
    layout = (rng.random((n, n)) < 0.4).astype(int)
    layout[5, 5] = 1
    pred, truth = rng.normal(300, 5, (n, n)), rng.normal(300, 5, (n, n))
    got = tuple(evaluate(pred, truth, build_masks(layout, w_b)))
    np.testing.assert_allclose(got, reference(pred, truth, layout, w_b), rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-100, 100))
def test_identities(seed, c):
    rng = np.random.default_rng(seed)
    truth = rng.uniform(298, 400, (200, 200))
    pred = truth + rng.normal(0, 3, truth.shape)
    rep = evaluate(pred, truth, MASKS)
    assert rep.mae <= rep.maxae and rep.cmae <= rep.mcae
    assert evaluate(truth, pred, MASKS) == rep
    shifted = evaluate(pred + c, truth + c, MASKS)
    np.testing.assert_allclose(tuple(shifted), tuple(rep), rtol=1e-9, atol=1e-9)


def test_full_cover_layout():
    rng = np.random.default_rng(0)
    p, t = rng.random((10, 10)), rng.random((10, 10))
    rep = evaluate(p, t, build_masks(np.ones((10, 10), dtype=int)))
    assert rep.cmae == rep.mae and rep.mcae == rep.maxae


def test_aggregate():
    a = MetricsReport(1, 2, 1, 3, 1)
    b = MetricsReport(3, 4, 1, 1, 5)
    assert aggregate([a]) == a
    assert aggregate([a, b]) == MetricsReport(2, 3, 1, 2, 3)
    with pytest.raises(EmptyListError):
        aggregate([])


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=1, max_size=20))
def test_aggregate_preserves_order(pairs):
    reps = [MetricsReport(min(x, y), max(x, y), 0, 0, 0) for x, y in pairs]
    agg = aggregate(reps)
    assert agg.mae <= agg.maxae + 1e-12


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        evaluate(np.zeros((10, 10)), np.zeros((200, 200)), MASKS)
