import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tlrmt.panel import (
    PanelError,
    PricePanel,
    ReturnPanel,
    ingest_csv,
    load_cache,
    save_cache,
    to_magnitudes,
    to_returns,
)


def write(tmp_path, text, name="p.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def price_panel(rows, missing=None):
    rows = np.asarray(rows, dtype=float)
    n, t = rows.shape
    if missing is None:
        missing = np.zeros(rows.shape, bool)
    return PricePanel([f"s{i}" for i in range(n)], [str(k) for k in range(t)], rows, missing)


def test_ingest_empty_cell_sets_one_missing_bit(tmp_path):
    p = write(tmp_path, "date,a,b,c\n2000-01-03,1,2,3\n2000-01-04,1.1,,3.1\n"
                        "2000-01-05,1.2,2.2,3.2\n2000-01-06,1.3,2.3,3.3\n")
    panel = ingest_csv(p)
    assert panel.shape == (3, 4)
    assert panel.names == ["a", "b", "c"]
    assert panel.missing.sum() == 1
    assert panel.missing[1, 1]


def test_ingest_rejects_unordered_timestamps(tmp_path):
    p = write(tmp_path, "date,a,b\n2000-01-04,1,2\n2000-01-03,1,2\n2000-01-05,1,2\n")
    with pytest.raises(PanelError, match="non-monotone timestamps"):
        ingest_csv(p)


def test_ingest_names_zero_price_cell(tmp_path):
    p = write(tmp_path, "date,a,b\n1,1,2\n2,0.0,2\n3,1,2\n")
    with pytest.raises(PanelError, match=r"p.csv:3.*'a'"):
        ingest_csv(p)


@pytest.mark.parametrize("text", ["date,a\n1,1\n2,2\n3,3\n", "date,a,b\n1,1,2\n2,1,2\n"])
def test_ingest_rejects_too_small(tmp_path, text):
    with pytest.raises(PanelError):
        ingest_csv(write(tmp_path, text))


def test_ingest_numeric_timestamps_compare_numerically(tmp_path):
    p = write(tmp_path, "t,a,b\n9,1,2\n10,1,2\n11,1,2\n")
    assert ingest_csv(p).timestamps == ["9", "10", "11"]


def test_constant_series_fully_zero_masked():
    r = to_returns(price_panel([[5, 5, 5, 5], [1, 2, 3, 4]]))
    assert r.values[0].tolist() == [0, 0, 0]
    assert r.mask[0].all()
    assert not r.mask[1].any()


def test_log_identity():
    r = to_returns(price_panel([[1, math.e, math.e**2], [1, 2, 3]]))
    np.testing.assert_allclose(r.values[0], [1.0, 1.0], rtol=1e-15)


def test_hand_evaluated_returns():
    r = to_returns(price_panel([[100, 105, 99], [1, 2, 3]]))
    np.testing.assert_allclose(r.values[0], [0.048790164169432, -0.058840500022933], atol=1e-12)


def test_missing_price_masks_both_neighbouring_returns():
    missing = np.zeros((2, 5), bool)
    missing[0, 2] = True
    r = to_returns(price_panel([[1, 2, 9, 4, 5], [1, 2, 3, 4, 5]], missing))
    assert r.mask[0].tolist() == [False, True, True, False]
    assert r.values[0, 1] == r.values[0, 2] == 0.0


def test_zero_mask_can_be_disabled():
    r = to_returns(price_panel([[1, 1, 2, 2], [1, 2, 3, 4]]), zero_mask=False)
    assert not r.mask.any()


def _returns(rows, mask=None):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n, t = rows.shape
    return ReturnPanel([f"s{i}" for i in range(n)], [str(k) for k in range(t)], rows, mask)


@pytest.mark.parametrize("row, expected", [
    ([1, -1], [1, 1]),
    ([2, 2, 2], [0, 0, 0]),
    ([0.03, -0.01, 0.01], [0.02, 0.02, 0.0]),
])
def test_magnitudes(row, expected):
    m = to_magnitudes(_returns([row, row]))
    np.testing.assert_allclose(m.magnitudes[0], expected, atol=1e-15)


def test_magnitude_mean_skips_masked_cells():
    mask = np.array([[False, True, False, False]] * 2)
    m = to_magnitudes(_returns([[1.0, 0.0, 3.0, 2.0]] * 2, mask))
    np.testing.assert_allclose(m.values[0], [1.0, 0.0, 1.0, 0.0])


def test_magnitudes_need_two_unmasked_cells():
    mask = np.array([[False, True, True], [False, False, False]])
    with pytest.raises(PanelError):
        to_magnitudes(_returns([[1.0, 0, 0], [1, 2, 3]], mask))


@settings(max_examples=50, deadline=None)
@given(arrays(float, (3, 40), elements=st.floats(-0.2, 0.2)))
def test_round_trip_exp_cumsum(increments):
    logp = np.concatenate([np.zeros((3, 1)), np.cumsum(increments, axis=1)], axis=1)
    r = to_returns(price_panel(100 * np.exp(logp)), zero_mask=False)
    np.testing.assert_allclose(r.values, increments, atol=1e-12 * 100)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (2, 30), elements=st.floats(-1, 1)),
       arrays(bool, (2, 30), elements=st.booleans()))
def test_signed_residuals_sum_to_zero(x, mask):
    mask[:, :2] = False
    m = to_magnitudes(_returns(x, mask))
    live = ~m.mask
    for i in range(2):
        v = x[i][live[i]]
        assert abs((v - v.mean()).sum()) < 1e-10
        assert (m.values[i][~live[i]] == 0).all()


def test_cache_round_trip(tmp_path):
    prices = price_panel([[1, 2, 3, 3], [2, 3, 4, 5]])
    returns = to_returns(prices)
    save_cache(tmp_path / "c.npz", prices, returns)
    p2, r2 = load_cache(tmp_path / "c.npz")
    np.testing.assert_array_equal(r2.values, returns.values)
    np.testing.assert_array_equal(r2.mask, returns.mask)
    assert r2.names == returns.names and p2.timestamps == prices.timestamps


def test_panels_are_immutable():
    r = _returns([[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        r.values[0, 0] = 5.0
