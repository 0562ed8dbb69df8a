import json

import numpy as np
import pytest

from ssoe.arima import ArimaOrders, fit_arima, sma_model
from ssoe.errors import FormatError, InputError
from ssoe.ets import EtsSpec, fit_ets
from ssoe.forecasting import prediction_interval
from ssoe.serialization import FORMAT_VERSION, from_dict, load_model, save_model, to_dict


@pytest.fixture
def fits(rng, seasonal_series):
    y = 50 + rng.normal(size=80).cumsum()
    return [
        fit_ets(seasonal_series, EtsSpec.parse("MAdM", 12)),
        fit_ets(y, EtsSpec.parse("ANN")),
        fit_arima(y, ArimaOrders.parse("ar=1;i=1;ma=1")),
        sma_model(y, 4),
    ]


def test_round_trip_forecasts_bitwise(fits, tmp_path):
    for k, fit in enumerate(fits):
        path = tmp_path / f"m{k}.json"
        save_model(fit, path)
        back = load_model(path)
        a = prediction_interval(fit, 12, seed=3)
        b = prediction_interval(back, 12, seed=3)
        np.testing.assert_array_equal(a.mean, b.mean)
        np.testing.assert_array_equal(a.lower, b.lower)
        np.testing.assert_array_equal(a.upper, b.upper)
        assert back.params == {k_: float(v) for k_, v in fit.params.items()}
        assert str(back.spec) == str(fit.spec)


def test_spec_string_exact(fits):
    d = to_dict(fits[0])
    assert d["name"] == "ETS(M,Ad,M)"
    assert d["format_version"] == FORMAT_VERSION


@pytest.mark.parametrize("mutate, field", [
    (lambda d: d.pop("final_states"), "final_states"),
    (lambda d: d["model"].__setitem__("transition", "abc"), "model.transition"),
    (lambda d: d["model"].__setitem__("measurement", [[1.0]]), "model.measurement"),
    (lambda d: d.__setitem__("format_version", 99), "format_version"),
    (lambda d: d.__setitem__("format", "other"), "format"),
    (lambda d: d["fit"].pop("sigma2"), "fit.sigma2"),
    (lambda d: d.__setitem__("final_states", [[1.0, 2.0]]), "final_states"),
    (lambda d: d["spec"].__setitem__("kind", "x"), "spec.kind"),
])
def test_corrupt_file_names_field(fits, mutate, field):
    d = json.loads(json.dumps(to_dict(fits[1])))
    mutate(d)
    with pytest.raises(FormatError, match=f"field '{field}'"):
        from_dict(d)


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        load_model(p)
    assert issubclass(FormatError, InputError)
