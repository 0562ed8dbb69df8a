import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ssoe import _kernels as kern
from ssoe.arima import (
    ArimaOrders,
    build_arima_state_space,
    expand_polynomials,
    presample_block,
)
from ssoe.core import (
    StateSpaceModel,
    TimeSeries,
    backcast_initialize,
    fit_pass,
    generate,
    lagged_state,
)
from ssoe.errors import SpecificationError, StructuralError
from ssoe.ets import EtsSpec, EtsState, PersistenceParams, build_ets

from oracles import conventional_aaa


def ann(alpha, level):
    return build_ets(EtsSpec.parse("ANN"), PersistenceParams(alpha), EtsState(level))


# -- TimeSeries ---------------------------------------------------------------

def test_timeseries_prepends_unit_lag_and_splits():
    ts = TimeSeries(np.arange(10.0), lags=(12,), holdout=3)
    assert ts.lags == (1, 12)
    assert ts.period == 12
    np.testing.assert_array_equal(ts.train, np.arange(7.0))
    np.testing.assert_array_equal(ts.test, [7.0, 8.0, 9.0])


@pytest.mark.parametrize("kwargs", [
    dict(lags=(1, 12, 4)),
    dict(lags=(1, 1)),
    dict(holdout=10),
    dict(holdout=-1),
])
def test_timeseries_rejects_bad_input(kwargs):
    with pytest.raises(SpecificationError):
        TimeSeries(np.arange(10.0), **kwargs)


def test_timeseries_rejects_missing_training_values():
    with pytest.raises(SpecificationError):
        TimeSeries([1.0, np.nan, 3.0])
    # missing values in the holdout are fine
    TimeSeries([1.0, 2.0, np.nan], holdout=1)


# -- StateSpaceModel ------------------------------------------------------------

def test_model_dimension_checks():
    with pytest.raises(SpecificationError):
        StateSpaceModel(np.ones(2), np.eye(3), np.ones(2), [1, 1], np.zeros((2, 1)))
    with pytest.raises(SpecificationError):
        StateSpaceModel(np.ones(2), np.eye(2), np.ones(2), [1, 0], np.zeros((2, 1)))
    with pytest.raises(SpecificationError):
        StateSpaceModel(np.ones(2), np.eye(2), np.ones(2), [1, 3], np.zeros((2, 2)))
    with pytest.raises(SpecificationError):
        StateSpaceModel(np.ones(1), np.eye(1), np.ones(1), [1], np.zeros((1, 1)), error="M")


# -- laggedState ----------------------------------------------------------------

def _history(K, L, T):
    # entry encodes its own time: row j, column c holds time c - L + 1
    times = np.arange(L + T) - L + 1
    return np.tile(times.astype(float), (K, 1)) + 1000 * np.arange(K)[:, None]


def test_lagged_state_seasonal_example():
    hist = _history(3, 12, 20)
    v = lagged_state(hist, 13, (1, 1, 12))
    np.testing.assert_array_equal(v - 1000 * np.arange(3), [12, 12, 1])


def test_lagged_state_arima_example():
    hist = _history(2, 2, 5)
    v = lagged_state(hist, 3, (1, 2))
    np.testing.assert_array_equal(v - [0, 1000], [2, 1])


def test_lagged_state_reads_presample():
    hist = _history(3, 12, 5)
    v = lagged_state(hist, 1, (1, 1, 12))
    np.testing.assert_array_equal(v - 1000 * np.arange(3), [0, 0, -11])


def test_lagged_state_out_of_range():
    hist = _history(2, 2, 5)
    with pytest.raises(StructuralError):
        lagged_state(hist, 0, (1, 2))
    with pytest.raises(StructuralError):
        lagged_state(hist, 7, (1, 2))


# -- fitPass ----------------------------------------------------------------------

def test_alpha_one_is_naive(rng):
    y = rng.normal(size=30).cumsum()
    art = fit_pass(ann(1.0, 3.5), y)
    assert art.fitted[0] == 3.5
    np.testing.assert_allclose(art.fitted[1:], y[:-1], atol=1e-12)


def test_fit_artifacts_invariants(rng, seasonal_series):
    model = build_ets(EtsSpec.parse("AAA", 12), PersistenceParams(0.3, 0.1, 0.2),
                      EtsState(50.0, 0.2, np.sin(2 * np.pi * np.arange(12) / 12)))
    art = fit_pass(model, seasonal_series)
    np.testing.assert_allclose(art.fitted + art.residuals, seasonal_series, atol=1e-12)
    assert art.sigma2 == pytest.approx(np.sum(art.residuals ** 2) / seasonal_series.size)
    assert art.states.shape == (3, 12 + seasonal_series.size)
    assert art.final_states.shape == (3, 12)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.integers(0, 2 ** 31))
def test_lagged_matches_conventional_aaa(a, b, g, seed):
    alpha = a
    beta = b * alpha
    gamma = g * (1 - alpha)
    rng = np.random.default_rng(seed)
    m = 4
    y = rng.normal(10, 2, 40)
    seas = rng.normal(0, 1, m)
    model = build_ets(EtsSpec.parse("AAA", m), PersistenceParams(alpha, beta, gamma),
                      EtsState(10.0, 0.5, seas))
    ours = fit_pass(model, y).fitted
    ref = conventional_aaa(y, alpha, beta, gamma, 10.0, 0.5, seas)
    np.testing.assert_allclose(ours, ref, rtol=0, atol=1e-10)


def test_zero_persistence_freezes_states(rng):
    model = build_ets(EtsSpec.parse("AAN"), PersistenceParams(0.0, 0.0), EtsState(2.0, 0.5))
    a = fit_pass(model, rng.normal(size=20))
    b = fit_pass(model, rng.normal(size=20) * 100)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_allclose(a.fitted, 2.0 + 0.5 * np.arange(1, 21))


def test_one_step_identity_no_leakage(rng):
    y = rng.normal(size=40).cumsum()
    model = build_ets(EtsSpec.parse("AAdN"), PersistenceParams(0.4, 0.1, phi=0.9),
                      EtsState(0.0, 0.1))
    full = fit_pass(model, y)
    for t in (5, 17, 39):
        part = fit_pass(model, y[:t])
        ahead, _ = generate(model, np.zeros((1, 1)), start=part.final_states)
        assert ahead[0, 0] == pytest.approx(full.fitted[t], abs=1e-12)


def test_multiplicative_degenerate_is_flagged_not_raised():
    model = build_ets(EtsSpec.parse("MNN"), PersistenceParams(0.5), EtsState(1.0))
    art = fit_pass(model, np.array([1.0, -10.0, 1.0, 1.0]))
    assert not art.ok
    assert np.isinf(art.sigma2)


def test_multiplicative_residual_is_relative():
    model = build_ets(EtsSpec.parse("MNN"), PersistenceParams(0.0), EtsState(4.0))
    art = fit_pass(model, np.array([5.0, 2.0]))
    np.testing.assert_allclose(art.residuals, [0.25, -0.5])


# -- generate -------------------------------------------------------------------

def test_generate_zero_noise_is_point_forecast():
    model = build_ets(EtsSpec.parse("AAN"), PersistenceParams(0.3, 0.1), EtsState(10.0, 2.0))
    paths, states = generate(model, np.zeros((2, 5)))
    np.testing.assert_allclose(paths, np.tile(10 + 2 * np.arange(1, 6), (2, 1)))
    assert states.shape == (2, 2, 6)


def test_generate_then_filter_recovers_innovations(rng):
    model = build_ets(EtsSpec.parse("AAA", 4), PersistenceParams(0.3, 0.1, 0.2),
                      EtsState(10.0, 0.1, np.array([1.0, -1.0, 0.5, -0.5])))
    eps = rng.normal(size=(1, 50))
    ys, _ = generate(model, eps)
    np.testing.assert_allclose(fit_pass(model, ys[0]).residuals, eps[0], atol=1e-9)


# -- backcasting ----------------------------------------------------------------

def test_backcast_constant_series_converges():
    model = ann(0.3, 0.0)
    out = backcast_initialize(model, np.full(50, 7.0), iterations=3)
    assert out.initial[0, -1] == pytest.approx(7.0, abs=1e-6)


def test_backcast_one_iteration_hand_rolled():
    y = np.array([3.0, 5.0, 4.0, 6.0, 8.0, 7.0, 9.0, 10.0, 9.0, 11.0])
    alpha, l0 = 0.5, 1.0
    level = l0
    for v in y:
        level += alpha * (v - level)
    for v in y[::-1]:
        level += alpha * (v - level)
    out = backcast_initialize(ann(alpha, l0), y, iterations=1)
    assert out.initial[0, -1] == pytest.approx(level, abs=1e-12)


def test_backcast_needs_two_cycles():
    model = build_ets(EtsSpec.parse("ANA", 12), PersistenceParams(0.2, gamma=0.1),
                      EtsState(1.0, None, np.zeros(12)))
    with pytest.raises(SpecificationError):
        backcast_initialize(model, np.ones(23))


def test_backcast_arima_kernel_matches_generic(rng):
    y = rng.normal(size=60).cumsum()
    orders = ArimaOrders.parse("ar=1;i=1;ma=2")
    poly = expand_polynomials(orders, [np.array([0.4])], [np.array([-0.3, 0.1])])
    model = build_arima_state_space(poly, 0.0, presample_block(poly, y[0]))
    generic = backcast_initialize(model, y, 2, presample=lambda v: presample_block(poly, v))
    fast = kern.arima_backcast(y, model.measurement, model.transition, model.persistence,
                               model.lags, model.offset, 0.0, model.initial, True, 2, poly.eta)
    np.testing.assert_array_equal(generic.initial, fast)


def test_backcast_arima011_variance_close_to_optimized(rng):
    from ssoe.arima import fit_arima
    from ssoe.estimation import EstimationConfig
    eps = rng.normal(size=201)
    y = np.cumsum(eps[1:] - 0.5 * eps[:-1])
    orders = ArimaOrders.parse("i=1;ma=1")
    bc = fit_arima(y, orders, EstimationConfig(initial="backcasting"))
    op = fit_arima(y, orders, EstimationConfig(initial="optimization"))
    assert np.all(np.isfinite(bc.model.initial))
    assert bc.sigma2 <= 1.5 * op.sigma2
