import numpy as np
import pytest

from ssoe.arima import ArimaOrders, _stationary
from ssoe.errors import GenerationError, SpecificationError
from ssoe.estimation import EstimationConfig
from ssoe.ets import EtsSpec, fit_ets
from ssoe.forecasting import point_forecast
from ssoe.simulate import (
    SimulationSpec,
    register_randomizer,
    simulate_from_fitted,
    simulate_series,
)


def test_frozen_level_white_noise():
    res = simulate_series(SimulationSpec(EtsSpec.parse("ANN"), 5000, 1,
                                         {"alpha": 0.0, "level": 5.0}, seed=1))
    assert res.series[0].mean() == pytest.approx(5.0, abs=0.1)
    np.testing.assert_allclose(res.series[0] - 5.0, res.innovations[0])


def test_random_walk_differences():
    res = simulate_series(SimulationSpec(ArimaOrders.parse("i=1"), 1000, 1, seed=2))
    assert 0.8 <= np.var(np.diff(res.series[0])) <= 1.2


def test_custom_randomizer_log_abs_normal():
    def log_abs(rng, size, mu=0.0, sd=1.0):
        return np.log(np.abs(rng.normal(mu, sd, size)))

    res = simulate_series(SimulationSpec(EtsSpec.parse("ANN"), 20000, 1,
                                         {"alpha": 0.1, "level": 0.0}, randomizer=log_abs,
                                         seed=3))
    oracle = np.log(np.abs(np.random.default_rng(99).normal(size=200000)))
    assert res.innovations.mean() == pytest.approx(oracle.mean(), abs=0.05)
    assert res.innovations.std() == pytest.approx(oracle.std(), abs=0.05)


def test_registered_randomizer_by_name():
    register_randomizer("uniform_test", lambda rng, size, width=1.0: rng.uniform(-width, width, size))
    res = simulate_series(SimulationSpec(EtsSpec.parse("ANN"), 100, 2, {"alpha": 0.1},
                                         randomizer="uniform_test",
                                         randomizer_params={"width": 0.5}, seed=3))
    assert np.abs(res.innovations).max() <= 0.5


def test_non_finite_draw_names_index():
    def bad(rng, size):
        out = rng.normal(size=size)
        out[7] = np.inf
        return out

    with pytest.raises(GenerationError, match="draw 7"):
        simulate_series(SimulationSpec(EtsSpec.parse("ANN"), 20, 1, {"alpha": 0.1},
                                       randomizer=bad, seed=1))


def test_unknown_randomizer():
    with pytest.raises(SpecificationError):
        simulate_series(SimulationSpec(EtsSpec.parse("ANN"), 20, randomizer="cauchy-ish"))


def test_seed_determinism_and_replicate_independence():
    spec = SimulationSpec(EtsSpec.parse("AAN"), 50, 3, seed=42)
    a, b = simulate_series(spec), simulate_series(spec)
    np.testing.assert_array_equal(a.series, b.series)
    assert not np.allclose(a.innovations[0], a.innovations[1])
    assert a.states.shape == (3, 2, 51)


def test_zero_noise_equals_point_forecast():
    res = simulate_series(SimulationSpec(EtsSpec.parse("AAdA", 4), 24, 1,
                                         randomizer_params={"sd": 0.0}, seed=5))

    class Start:
        model = res.model
        final_states = res.model.initial
        sigma2 = 0.0

    np.testing.assert_allclose(res.series[0], point_forecast(Start, 24), atol=1e-12)


def test_random_parameters_in_documented_ranges():
    for seed in range(30):
        res = simulate_series(SimulationSpec(EtsSpec.parse("AAdA", 4), 10, 1, seed=seed))
        p = res.params
        assert 0.05 <= p["alpha"] <= 0.5
        assert 0 <= p["beta"] <= p["alpha"] / 2
        assert 0 <= p["gamma"] <= (1 - p["alpha"]) / 2
        assert 0.8 <= p["phi"] <= 1


def test_random_arma_inside_region():
    for seed in range(20):
        res = simulate_series(SimulationSpec(ArimaOrders.parse("ar=2;ma=2"), 10, 1, seed=seed))
        assert _stationary(np.asarray(res.params["ar"][0]), -1.0)
        assert _stationary(np.asarray(res.params["ma"][0]), 1.0)


def test_from_fitted_shape_and_seed(rng):
    y = 100 + rng.normal(0, 2, 144).cumsum()
    fit = fit_ets(y, EtsSpec.parse("ANN"))
    a = simulate_from_fitted(fit, obs=120, nsim=5, seed=1)
    b = simulate_from_fitted(fit, obs=120, nsim=5, seed=1)
    assert a.series.shape == (5, 120)
    np.testing.assert_array_equal(a.series, b.series)


def test_from_fitted_round_trip_alpha():
    truth = simulate_series(SimulationSpec(EtsSpec.parse("ANN"), 500, 1,
                                           {"alpha": 0.3, "level": 100.0}, seed=8))
    fit = fit_ets(truth.series[0], EtsSpec.parse("ANN"))
    reps = simulate_from_fitted(fit, obs=500, nsim=50, seed=9)
    cfg = EstimationConfig(initial="backcasting")
    alphas = [fit_ets(y, EtsSpec.parse("ANN"), cfg).params["alpha"] for y in reps.series]
    assert abs(np.median(alphas) - fit.params["alpha"]) <= 0.15


def test_bad_sizes():
    with pytest.raises(SpecificationError):
        simulate_series(SimulationSpec(EtsSpec.parse("ANN"), 0))


def test_laplace_default_matches_fitted_spread(rng):
    t = np.arange(96)
    y = (100 + t) * (1 + 0.2 * np.sin(2 * np.pi * t / 12)) * np.exp(rng.normal(0, 0.02, 96))
    fit = fit_ets(y, EtsSpec.parse("MNM", 12))
    res = simulate_from_fitted(fit, obs=96, nsim=20, seed=1, randomizer="laplace")
    assert res.innovations.std() == pytest.approx(np.sqrt(fit.sigma2), rel=0.1)
    sim = simulate_series(SimulationSpec(EtsSpec.parse("MNN"), 5000, 1, {"alpha": 0.1},
                                         randomizer="laplace", seed=2))
    assert sim.innovations.std() == pytest.approx(0.05, rel=0.1)
