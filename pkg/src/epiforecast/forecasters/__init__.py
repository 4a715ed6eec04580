"""Forecaster families behind a common fit/forecast interface.

Five kinds: "autoreg" (OLS lag regression), "arima" (CSS + Levenberg-
Marquardt), "lstm" (two stacked LSTM layers, BPTT), "mlp" (one-hidden-layer
net), "additive" (piecewise-linear trend plus weekly Fourier terms). All fit
functions expect a normalized training Series and return a FittedModel;
forecasts come back on the normalized scale.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..data import Series
from .base import (
    KINDS,
    AdditiveConfig,
    ArimaOrder,
    ArOrder,
    FittedModel,
    ForecasterSpec,
    LstmConfig,
    MlpConfig,
)
from .additive import build_additive_design, fit_additive, forecast_additive, insample_additive
from .arima import (
    arima_css_objective,
    css_residuals,
    fit_arima,
    forecast_arima,
    grid_search_arima,
    insample_arima,
)
from .autoreg import fit_autoreg, forecast_autoreg, insample_autoreg
from .lstm import (
    forecast_lstm,
    insample_lstm,
    lstm_backward,
    lstm_cell_step,
    lstm_forward,
    train_lstm,
)
from .mlp import fit_mlp, forecast_mlp, insample_mlp
from .serialize import load_model, model_from_dict, model_to_dict, save_model

__all__ = [
    "KINDS",
    "AdditiveConfig",
    "ArOrder",
    "ArimaOrder",
    "FittedModel",
    "ForecasterSpec",
    "LstmConfig",
    "MlpConfig",
    "arima_css_objective",
    "build_additive_design",
    "css_residuals",
    "fit",
    "fit_additive",
    "fit_arima",
    "fit_autoreg",
    "fit_mlp",
    "forecast",
    "forecast_additive",
    "forecast_arima",
    "forecast_autoreg",
    "forecast_lstm",
    "forecast_mlp",
    "grid_search_arima",
    "insample_predictions",
    "load_model",
    "lstm_backward",
    "lstm_cell_step",
    "lstm_forward",
    "model_from_dict",
    "model_to_dict",
    "save_model",
    "train_lstm",
]


def fit(spec: ForecasterSpec, train: Series) -> FittedModel:
    """Dispatch to the family fitter; the returned model carries the full spec."""
    if spec.kind == "autoreg":
        model = fit_autoreg(train, spec.config)
    elif spec.kind == "arima":
        model = fit_arima(train, spec.config)
    elif spec.kind == "lstm":
        model = train_lstm(train, spec.config, spec.seed)
    elif spec.kind == "mlp":
        model = fit_mlp(train, spec.config, spec.seed)
    else:
        model = fit_additive(train, spec.config)
    return replace(model, spec=spec)


def forecast(model: FittedModel, h: int) -> np.ndarray:
    """h-step point forecast on the normalized scale."""
    kind = model.spec.kind
    if kind == "autoreg":
        return forecast_autoreg(model, h)
    if kind == "arima":
        return forecast_arima(model, h)
    if kind == "lstm":
        return forecast_lstm(model, h)
    if kind == "mlp":
        return forecast_mlp(model, h)
    return forecast_additive(model, h)


def insample_predictions(model: FittedModel, train: Series) -> tuple[np.ndarray, np.ndarray]:
    """(actual, predicted) one-step fitted values on the training frame."""
    kind = model.spec.kind
    if kind == "autoreg":
        return insample_autoreg(model, train)
    if kind == "arima":
        return insample_arima(model, train)
    if kind == "lstm":
        return insample_lstm(model, train)
    if kind == "mlp":
        return insample_mlp(model, train)
    return insample_additive(model, train)
