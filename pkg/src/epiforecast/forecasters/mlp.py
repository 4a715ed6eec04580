"""Feed-forward one-hidden-layer regressor over lag windows.

tanh hidden activation, linear output, full-batch gradient descent. With
hidden_units = 0 the net collapses to a linear map of the window, i.e. plain
linear autoregression trained by gradient descent. The seasonal variant
appends a day-of-week one-hot for the day being predicted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..data import Series
from ..errors import ContractError, DivergenceError
from ..transform import make_windows
from .base import FittedModel, ForecasterSpec, MlpConfig

INIT_SCALE = 0.08


@dataclass(frozen=True)
class MlpParams:
    """hidden_w/hidden_b are None when the hidden layer is absent."""

    hidden_w: np.ndarray | None
    hidden_b: np.ndarray | None
    out_w: np.ndarray
    out_b: float
    next_dow: int | None = None  # weekday index of the first post-training day
    loss_history: tuple[float, ...] = ()


def _dow_onehot(dow: np.ndarray) -> np.ndarray:
    out = np.zeros((dow.size, 7), dtype=np.float64)
    out[np.arange(dow.size), dow % 7] = 1.0
    return out


def _features(inputs: np.ndarray, target_dows: np.ndarray | None) -> np.ndarray:
    if target_dows is None:
        return inputs
    return np.concatenate([inputs, _dow_onehot(target_dows)], axis=1)


def _forward(params: MlpParams, X: np.ndarray) -> np.ndarray:
    if params.hidden_w is None:
        return X @ params.out_w + params.out_b
    H = np.tanh(X @ params.hidden_w.T + params.hidden_b)
    return H @ params.out_w + params.out_b


@dataclass(frozen=True)
class MlpGradients:
    hidden_w: np.ndarray | None
    hidden_b: np.ndarray | None
    out_w: np.ndarray
    out_b: float


def mlp_gradients(params: MlpParams, X: np.ndarray, y: np.ndarray) -> tuple[MlpGradients, np.ndarray]:
    """Exact gradient of mean squared error over (X, y), plus the predictions."""
    n = len(y)
    if params.hidden_w is not None:
        A = X @ params.hidden_w.T + params.hidden_b
        H = np.tanh(A)
        preds = H @ params.out_w + params.out_b
        d_preds = (2.0 / n) * (preds - y)
        dH = np.outer(d_preds, params.out_w) * (1.0 - H * H)
        grads = MlpGradients(
            hidden_w=dH.T @ X,
            hidden_b=dH.sum(axis=0),
            out_w=H.T @ d_preds,
            out_b=float(np.sum(d_preds)),
        )
        return grads, preds
    preds = X @ params.out_w + params.out_b
    d_preds = (2.0 / n) * (preds - y)
    grads = MlpGradients(
        hidden_w=None,
        hidden_b=None,
        out_w=X.T @ d_preds,
        out_b=float(np.sum(d_preds)),
    )
    return grads, preds


def fit_mlp(train: Series, config: MlpConfig, seed: int = 0) -> FittedModel:
    windows = make_windows(train, config.window)
    target_dows = None
    if config.seasonal:
        first_target = train.start_date.weekday() + config.window
        target_dows = (first_target + np.arange(len(windows))) % 7
    X = _features(windows.inputs, target_dows)
    y = windows.targets
    n, d = X.shape

    rng = np.random.default_rng(seed)
    h = config.hidden_units
    if h > 0:
        hidden_w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(h, d))
        hidden_b = rng.uniform(-INIT_SCALE, INIT_SCALE, size=h)
        out_w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=h)
    else:
        hidden_w = None
        hidden_b = None
        out_w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=d)
    out_b = float(rng.uniform(-INIT_SCALE, INIT_SCALE))
    params = MlpParams(hidden_w, hidden_b, out_w, out_b)

    lr = config.learning_rate
    losses = [float(np.mean((_forward(params, X) - y) ** 2))]
    # a diverging run floods intermediate ops with inf/nan before the per-epoch
    # finiteness check below raises; keep numpy quiet on that handled path
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(config.epochs):
            grads, preds = mlp_gradients(params, X, y)
            if h > 0:
                params = MlpParams(
                    hidden_w=params.hidden_w - lr * grads.hidden_w,
                    hidden_b=params.hidden_b - lr * grads.hidden_b,
                    out_w=params.out_w - lr * grads.out_w,
                    out_b=params.out_b - lr * grads.out_b,
                    next_dow=params.next_dow,
                )
            else:
                params = MlpParams(
                    hidden_w=None,
                    hidden_b=None,
                    out_w=params.out_w - lr * grads.out_w,
                    out_b=params.out_b - lr * grads.out_b,
                    next_dow=params.next_dow,
                )
            err = preds - y
            loss = float(np.mean(err * err))
            if not np.isfinite(loss):
                raise DivergenceError(f"MLP training diverged at epoch {epoch + 1}")
            losses.append(loss)

        final = float(np.mean((_forward(params, X) - y) ** 2))
    if not np.isfinite(final):
        raise DivergenceError(f"MLP training diverged at epoch {config.epochs}")
    losses.append(final)
    next_dow = (train.start_date.weekday() + len(train)) % 7 if config.seasonal else None
    params = replace(params, next_dow=next_dow, loss_history=tuple(losses))

    return FittedModel(
        spec=ForecasterSpec("mlp", config, seed),
        params=params,
        train_tail=train.values[-config.window :],
        train_end_date=train.end_date,
    )


def forecast_mlp(model: FittedModel, h: int) -> np.ndarray:
    if h < 1:
        raise ContractError("forecast horizon must be >= 1")
    config: MlpConfig = model.spec.config
    params: MlpParams = model.params
    window = list(model.train_tail[-config.window :])
    out = np.empty(h, dtype=np.float64)
    for k in range(h):
        x = np.array(window, dtype=np.float64)[None, :]
        dows = None
        if config.seasonal:
            dows = np.array([(params.next_dow + k) % 7])
        pred = float(_forward(params, _features(x, dows))[0])
        out[k] = pred
        window.pop(0)
        window.append(pred)
    return out


def insample_mlp(model: FittedModel, train: Series) -> tuple[np.ndarray, np.ndarray]:
    config: MlpConfig = model.spec.config
    windows = make_windows(train, config.window)
    target_dows = None
    if config.seasonal:
        first_target = train.start_date.weekday() + config.window
        target_dows = (first_target + np.arange(len(windows))) % 7
    X = _features(windows.inputs, target_dows)
    return windows.targets, _forward(model.params, X)
