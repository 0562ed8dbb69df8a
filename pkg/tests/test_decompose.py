import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ssoe.decompose import centred_moving_average, decompose_forecast, msdecompose
from ssoe.errors import SpecificationError


def interior(res):
    return np.isfinite(res.trend)


def test_centred_moving_average_even_window():
    y = np.arange(10.0)
    out = centred_moving_average(y, 4)
    assert np.isnan(out[:2]).all() and np.isnan(out[-2:]).all()
    np.testing.assert_allclose(out[2:-2], y[2:-2])  # a line is its own centred mean
    y2 = np.array([0, 0, 8, 0, 0, 0.0])
    assert centred_moving_average(y2, 4)[2] == pytest.approx(2.0)
    assert centred_moving_average(y2, 4)[3] == pytest.approx(2.0)


def test_sine_with_trend_recovered(rng):
    t = np.arange(144)
    pattern = 10 * np.sin(2 * np.pi * np.arange(12) / 12)
    y = 0.5 * t + pattern[t % 12]
    res = msdecompose(y, [12])
    assert np.corrcoef(res.seasonals[0], pattern)[0, 1] > 0.99
    assert np.nanvar(res.residual) < 0.01 * np.var(y)


def test_constant_series():
    res = msdecompose(np.full(48, 3.0), [4, 12])
    for ring in res.seasonals:
        np.testing.assert_allclose(ring, 0.0, atol=1e-12)
    np.testing.assert_allclose(res.trend[interior(res)], 3.0)


def test_double_seasonal_multiplicative(rng):
    n = 336 * 3
    t = np.arange(n)
    s48 = 1 + 0.3 * np.sin(2 * np.pi * np.arange(48) / 48)
    day = np.exp(np.array([0.1, 0.05, 0.0, 0.02, -0.03, -0.2, -0.15]))
    s336 = np.repeat(day, 48) * (1 + 0.05 * np.sin(2 * np.pi * np.arange(336) / 336))
    y = (1000 + 0.1 * t) * s48[t % 48] * s336[t % 336] * np.exp(rng.normal(0, 0.01, n))
    res = msdecompose(y, [48, 336], type="m")
    assert np.corrcoef(np.log(res.seasonals[0]), np.log(s48))[0, 1] > 0.95
    assert np.corrcoef(np.log(res.seasonals[1]), np.log(s336))[0, 1] > 0.95


@given(st.integers(0, 2 ** 31), st.sampled_from([[4], [12], [4, 12]]))
def test_reconstruction_identity_additive(seed, lags):
    y = np.random.default_rng(seed).normal(size=60).cumsum()
    res = msdecompose(y, lags)
    mask = interior(res)
    np.testing.assert_allclose(res.reconstruct()[mask], y[mask], atol=1e-9)
    for ring in res.seasonals:
        assert ring.sum() == pytest.approx(0.0, abs=1e-9)


@given(st.integers(0, 2 ** 31))
def test_log_exp_duality(seed):
    x = np.random.default_rng(seed).normal(size=48).cumsum() * 0.1
    a = msdecompose(x, [4, 12])
    m = msdecompose(np.exp(x), [4, 12], type="multiplicative")
    mask = interior(a)
    np.testing.assert_allclose(m.trend[mask], np.exp(a.trend[mask]), rtol=1e-10)
    np.testing.assert_allclose(m.residual[mask], np.exp(a.residual[mask]), rtol=1e-10)
    for ra, rm in zip(a.seasonals, m.seasonals):
        np.testing.assert_allclose(rm, np.exp(ra), rtol=1e-10)
    np.testing.assert_allclose(m.reconstruct()[mask], np.exp(x)[mask], rtol=1e-10)


def test_multiplicative_rings_mean_about_one(rng):
    t = np.arange(96)
    y = (100 + t) * (1 + 0.1 * np.sin(2 * np.pi * t / 12)) * np.exp(rng.normal(0, 0.01, 96))
    res = msdecompose(y, [12], type="multiplicative")
    assert res.seasonals[0].mean() == pytest.approx(1.0, abs=0.01)


def test_residual_variance_reduced(rng):
    t = np.arange(120)
    y = 2 * np.sin(2 * np.pi * t / 12) + rng.normal(0, 0.5, 120)
    res = msdecompose(y, [12])
    detrended = y - res.trend
    assert np.nanvar(res.residual) < np.nanvar(detrended)


def test_errors():
    with pytest.raises(SpecificationError):
        msdecompose(np.ones(20), [12])
    with pytest.raises(SpecificationError):
        msdecompose(np.r_[np.ones(30), 0.0], [12], type="m")
    with pytest.raises(SpecificationError):
        msdecompose(np.ones(30), [1])


def test_forecast_constant_trend_repeats_pattern():
    pattern = np.array([1.0, -2.0, 3.0, -2.0])
    y = 10 + np.tile(pattern, 12)
    res = msdecompose(y, [4])
    fc = decompose_forecast(res, 8)
    assert fc.size == 8
    np.testing.assert_allclose(fc, 10 + np.tile(pattern, 2), atol=1e-6)


def test_forecast_line_plus_ring(rng):
    t = np.arange(132)
    pattern = 3 * np.sin(2 * np.pi * np.arange(12) / 12)
    sigma = 0.5
    y = 5 + 0.3 * t + pattern[t % 12] + rng.normal(0, sigma, t.size)
    res = msdecompose(y[:120], [12])
    fc = decompose_forecast(res, 12)
    truth = 5 + 0.3 * t[120:] + pattern[t[120:] % 12]
    assert np.mean(np.abs(fc - truth)) < sigma


def test_forecast_short_trend_fallback():
    y = np.tile([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2) + np.arange(12) * 0.1
    res = msdecompose(y, [6])
    fc = decompose_forecast(res, 6)
    assert fc.shape == (6,) and np.all(np.isfinite(fc))
