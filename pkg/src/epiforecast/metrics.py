"""Forecast accuracy measures.

All functions take parallel (actual, predicted) arrays and raise instead of
returning NaN: a silent NaN would poison a comparison table.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractError, UndefinedMetricError


def _as_pair(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.ndim != 1 or p.ndim != 1:
        raise ContractError("actual and predicted must be 1-d")
    if a.size == 0 or a.size != p.size:
        raise ContractError("actual and predicted must have equal nonzero length")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
        raise ContractError("actual and predicted must be finite")
    return a, p


def mse(actual, predicted) -> float:
    a, p = _as_pair(actual, predicted)
    d = a - p
    return float(np.mean(d * d))


def rmse(actual, predicted) -> float:
    return math.sqrt(mse(actual, predicted))


def mape(actual, predicted) -> float:
    """Mean absolute percentage error; undefined when any actual value is 0."""
    a, p = _as_pair(actual, predicted)
    if np.any(a == 0.0):
        raise UndefinedMetricError("mape undefined: actual contains a zero")
    return float(100.0 * np.mean(np.abs(a - p) / np.abs(a)))


def mase(actual, predicted, train) -> float:
    """Mean absolute scaled error.

    The scale is the training series' in-sample mean absolute one-step naive
    error, so values below 1 beat the naive forecast on the training frame.
    """
    a, p = _as_pair(actual, predicted)
    t = np.asarray(train, dtype=np.float64)
    if t.ndim != 1 or t.size < 2:
        raise ContractError("mase needs a training series of length >= 2")
    if not np.all(np.isfinite(t)):
        raise ContractError("training series must be finite")
    denom = float(np.mean(np.abs(np.diff(t))))
    if denom == 0.0:
        raise UndefinedMetricError("mase undefined: training series is constant")
    return float(np.mean(np.abs(a - p)) / denom)


def fit_score(actual, predicted) -> float:
    """Coefficient of determination R^2 = 1 - SSE/SST; undefined on constant actuals."""
    a, p = _as_pair(actual, predicted)
    mean = float(np.mean(a))
    sst = float(np.sum((a - mean) ** 2))
    if sst == 0.0:
        raise UndefinedMetricError("fit_score undefined: actual series is constant")
    sse = float(np.sum((a - p) ** 2))
    return 1.0 - sse / sst
