"""Model persistence: JSON round trips and malformed-file failures."""

import json
from dataclasses import replace

import numpy as np
import pytest

from epiforecast.errors import ModelFileError
from epiforecast.forecasters import ForecasterSpec, fit, forecast, load_model, save_model
from epiforecast.forecasters.base import (
    AdditiveConfig,
    ArimaOrder,
    ArOrder,
    LstmConfig,
    MlpConfig,
)
from epiforecast.forecasters.serialize import SCHEMA_VERSION, model_from_dict, model_to_dict
from epiforecast.transform import MinMaxScaler
from support import series

SPECS = [
    ForecasterSpec("autoreg", ArOrder(3), 0),
    ForecasterSpec("arima", ArimaOrder(1, 1, 1), 0),
    ForecasterSpec("lstm", LstmConfig(num_units=3, window=4, epochs=5, learning_rate=0.1), 11),
    ForecasterSpec("mlp", MlpConfig(window=3, hidden_units=2, epochs=20, learning_rate=0.05, seasonal=True), 3),
    ForecasterSpec("additive", AdditiveConfig(n_changepoints=2, changepoint_penalty=1.0, fourier_order=2), 0),
]


def small_series():
    rng = np.random.default_rng(0)
    return series(np.cumsum(np.abs(rng.normal(0.5, 0.2, 60))) / 30.0)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_save_load_round_trip_preserves_forecasts(tmp_path, spec):
    s = small_series()
    model = fit(spec, s)
    model = replace(model, scaler=MinMaxScaler(2.0, 9.0), target="deaths")
    path = tmp_path / f"{spec.kind}.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.spec == model.spec
    assert loaded.target == "deaths"
    assert loaded.train_end_date == model.train_end_date
    assert loaded.scaler == model.scaler
    assert loaded.train_tail.tolist() == model.train_tail.tolist()
    assert forecast(loaded, 10).tolist() == forecast(model, 10).tolist()


def test_saved_file_is_plain_versioned_json(tmp_path):
    model = fit(SPECS[0], small_series())
    path = tmp_path / "m.json"
    save_model(model, path)
    text = path.read_text()
    assert text.endswith("\n")
    doc = json.loads(text)
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["kind"] == "autoreg"


def test_dict_round_trip_without_files():
    model = fit(SPECS[1], small_series())
    clone = model_from_dict(model_to_dict(model))
    assert forecast(clone, 5).tolist() == forecast(model, 5).tolist()


def test_unsupported_schema_version(tmp_path):
    model = fit(SPECS[0], small_series())
    path = tmp_path / "m.json"
    save_model(model, path)
    doc = json.loads(path.read_text())
    doc["schema_version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFileError, match="schema"):
        load_model(path)


def test_missing_key_is_model_file_error(tmp_path):
    model = fit(SPECS[0], small_series())
    path = tmp_path / "m.json"
    save_model(model, path)
    doc = json.loads(path.read_text())
    del doc["params"]
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFileError):
        load_model(path)


def test_malformed_json_and_wrong_shape(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ModelFileError):
        load_model(path)
    path.write_text("[1, 2, 3]")
    with pytest.raises(ModelFileError):
        load_model(path)


def test_missing_file_is_model_file_error(tmp_path):
    with pytest.raises(ModelFileError):
        load_model(tmp_path / "absent.json")
