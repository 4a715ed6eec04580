"""Stacked LSTM regressor trained from scratch by mini-batch gradient descent.

Gate equations per step (row blocks of W in the order input, forget, output,
candidate):

    i = sigmoid(W_i [x; h] + b_i)      f = sigmoid(W_f [x; h] + b_f)
    o = sigmoid(W_o [x; h] + b_o)      g = tanh(W_g [x; h] + b_g)
    c = f * c_prev + i * g             h = o * tanh(c)

Windows feed one value per step; a linear head reads the final hidden state
of the top layer. Backpropagation through time is exact; gradients are
checked against central finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..data import Series
from ..errors import ContractError, DivergenceError
from ..transform import make_windows
from .base import FittedModel, ForecasterSpec, LstmConfig

INIT_SCALE = 0.08
FORGET_BIAS = 1.0


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


@dataclass(frozen=True)
class LstmLayerParams:
    """One layer's stacked gate weights W (4u, input_dim + u) and biases b (4u,)."""

    W: np.ndarray
    b: np.ndarray

    @property
    def units(self) -> int:
        return self.W.shape[0] // 4

    @property
    def input_dim(self) -> int:
        return self.W.shape[1] - self.units

    # gate views, in stack order
    @property
    def w_i(self) -> np.ndarray:
        return self.W[: self.units]

    @property
    def w_f(self) -> np.ndarray:
        return self.W[self.units : 2 * self.units]

    @property
    def w_o(self) -> np.ndarray:
        return self.W[2 * self.units : 3 * self.units]

    @property
    def w_g(self) -> np.ndarray:
        return self.W[3 * self.units :]

    @property
    def b_i(self) -> np.ndarray:
        return self.b[: self.units]

    @property
    def b_f(self) -> np.ndarray:
        return self.b[self.units : 2 * self.units]

    @property
    def b_o(self) -> np.ndarray:
        return self.b[2 * self.units : 3 * self.units]

    @property
    def b_g(self) -> np.ndarray:
        return self.b[3 * self.units :]


@dataclass(frozen=True)
class LstmParameters:
    layers: tuple[LstmLayerParams, ...]
    head_w: np.ndarray
    head_b: float
    loss_history: tuple[float, ...] = ()


@dataclass(frozen=True)
class LstmGradients:
    layers: tuple[LstmLayerParams, ...]
    head_w: np.ndarray
    head_b: float


def lstm_cell_step(
    x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray, layer: LstmLayerParams
) -> tuple[np.ndarray, np.ndarray]:
    """One cell update for a single (unbatched) step."""
    u = layer.units
    z = np.concatenate([np.atleast_1d(np.asarray(x, dtype=np.float64)), h_prev])
    if z.size != layer.W.shape[1]:
        raise ContractError(
            f"step input of size {z.size} does not match weight columns {layer.W.shape[1]}"
        )
    a = layer.W @ z + layer.b
    i = _sigmoid(a[:u])
    f = _sigmoid(a[u : 2 * u])
    o = _sigmoid(a[2 * u : 3 * u])
    g = np.tanh(a[3 * u :])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c


def _forward_batch(params: LstmParameters, X: np.ndarray):
    """Run a (batch, window) input matrix through all layers, caching activations."""
    B, w = X.shape
    layer_inputs = X[:, :, None]  # (B, w, 1)
    caches = []
    for layer in params.layers:
        u = layer.units
        h = np.zeros((B, u))
        c = np.zeros((B, u))
        steps = []
        hs = np.empty((B, w, u))
        for t in range(w):
            z = np.concatenate([layer_inputs[:, t, :], h], axis=1)
            a = z @ layer.W.T + layer.b
            i = _sigmoid(a[:, :u])
            f = _sigmoid(a[:, u : 2 * u])
            o = _sigmoid(a[:, 2 * u : 3 * u])
            g = np.tanh(a[:, 3 * u :])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            h_new = o * tanh_c
            steps.append((z, i, f, o, g, c, tanh_c))
            h, c = h_new, c_new
            hs[:, t, :] = h
        caches.append(steps)
        layer_inputs = hs
    h_last = layer_inputs[:, -1, :]
    preds = h_last @ params.head_w + params.head_b
    return preds, (caches, h_last)


def _backward_batch(params: LstmParameters, cache, d_preds: np.ndarray) -> LstmGradients:
    """Exact BPTT for the batched forward pass; d_preds is dLoss/dprediction."""
    caches, h_last = cache
    grad_head_w = h_last.T @ d_preds
    grad_head_b = float(np.sum(d_preds))
    d_h_inject = d_preds[:, None] * params.head_w[None, :]

    layer_grads: list[LstmLayerParams] = [None] * len(params.layers)  # type: ignore[list-item]
    d_inputs_above: list[np.ndarray] | None = None
    for li in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[li]
        steps = caches[li]
        u = layer.units
        d_in = layer.input_dim
        B = steps[0][0].shape[0]
        w = len(steps)
        dW = np.zeros_like(layer.W)
        db = np.zeros_like(layer.b)
        dh = np.zeros((B, u))
        dc = np.zeros((B, u))
        d_inputs = [None] * w  # gradient w.r.t. this layer's inputs, per step
        for t in range(w - 1, -1, -1):
            z, i, f, o, g, c_prev, tanh_c = steps[t]
            dh_t = dh
            if li == len(params.layers) - 1:
                if t == w - 1:
                    dh_t = dh_t + d_h_inject
            else:
                dh_t = dh_t + d_inputs_above[t]
            dc_t = dc + dh_t * o * (1.0 - tanh_c * tanh_c)
            do = dh_t * tanh_c
            di = dc_t * g
            dg = dc_t * i
            df = dc_t * c_prev
            da = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    do * o * (1.0 - o),
                    dg * (1.0 - g * g),
                ],
                axis=1,
            )
            dW += da.T @ z
            db += da.sum(axis=0)
            dz = da @ layer.W
            d_inputs[t] = dz[:, :d_in]
            dh = dz[:, d_in:]
            dc = dc_t * f
        layer_grads[li] = LstmLayerParams(W=dW, b=db)
        d_inputs_above = d_inputs
    return LstmGradients(layers=tuple(layer_grads), head_w=grad_head_w, head_b=grad_head_b)


def lstm_forward(params: LstmParameters, window: np.ndarray):
    """Predict from one window; returns (prediction, cache for lstm_backward)."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 1 or window.size < 1:
        raise ContractError("window must be a non-empty vector")
    preds, cache = _forward_batch(params, window[None, :])
    return float(preds[0]), cache


def lstm_backward(params: LstmParameters, cache, d_prediction: float) -> LstmGradients:
    """Gradients of the loss contribution given dLoss/dprediction for one window."""
    return _backward_batch(params, cache, np.array([d_prediction], dtype=np.float64))


def init_lstm_parameters(config: LstmConfig, rng: np.random.Generator) -> LstmParameters:
    """Seeded uniform init in [-0.08, 0.08]; forget-gate biases start at 1.0.

    Draw order is fixed: per layer W then b, then head weights, then head bias.
    """
    layers = []
    input_dim = 1
    u = config.num_units
    for _ in range(config.layers):
        W = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(4 * u, input_dim + u))
        b = rng.uniform(-INIT_SCALE, INIT_SCALE, size=4 * u)
        b[u : 2 * u] = FORGET_BIAS
        layers.append(LstmLayerParams(W=W, b=b))
        input_dim = u
    head_w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=u)
    head_b = float(rng.uniform(-INIT_SCALE, INIT_SCALE))
    return LstmParameters(layers=tuple(layers), head_w=head_w, head_b=head_b)


def train_lstm(train: Series, config: LstmConfig, seed: int = 0) -> FittedModel:
    """Window the series and fit by mini-batch gradient descent.

    Deterministic for identical (series, config, seed). epochs = 0 returns the
    freshly initialized parameters untouched.
    """
    windows = make_windows(train, config.window)
    X, y = windows.inputs, windows.targets
    n = len(windows)
    rng = np.random.default_rng(seed)
    params = init_lstm_parameters(config, rng)

    batch = n if config.batch_size == 0 else min(config.batch_size, n)
    preds, _ = _forward_batch(params, X)
    initial_mse = float(np.mean((preds - y) ** 2))
    losses = [initial_mse]
    lr = config.learning_rate
    # a diverging run floods intermediate ops with inf/nan before the per-epoch
    # finiteness check below raises; keep numpy quiet on that handled path
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(config.epochs):
            if batch < n:
                order = rng.permutation(n)
            else:
                order = np.arange(n)
            epoch_loss = 0.0
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                Xb, yb = X[idx], y[idx]
                preds, cache = _forward_batch(params, Xb)
                err = preds - yb
                epoch_loss += float(err @ err)
                d_preds = (2.0 / idx.size) * err
                grads = _backward_batch(params, cache, d_preds)
                new_layers = tuple(
                    LstmLayerParams(W=lp.W - lr * gp.W, b=lp.b - lr * gp.b)
                    for lp, gp in zip(params.layers, grads.layers)
                )
                params = LstmParameters(
                    layers=new_layers,
                    head_w=params.head_w - lr * grads.head_w,
                    head_b=params.head_b - lr * grads.head_b,
                )
            epoch_loss /= n
            if not np.isfinite(epoch_loss):
                raise DivergenceError(f"LSTM training diverged at epoch {epoch + 1}")
            losses.append(epoch_loss)

        preds, _ = _forward_batch(params, X)
        final_mse = float(np.mean((preds - y) ** 2))
    if not np.isfinite(final_mse):
        raise DivergenceError(f"LSTM training diverged at epoch {config.epochs}")
    losses.append(final_mse)
    params = replace(params, loss_history=tuple(losses))

    return FittedModel(
        spec=ForecasterSpec("lstm", config, seed),
        params=params,
        train_tail=train.values[-config.window :],
        train_end_date=train.end_date,
    )


def forecast_lstm(model: FittedModel, h: int) -> np.ndarray:
    """Recursive multi-step forecast: each prediction is appended to the window."""
    if h < 1:
        raise ContractError("forecast horizon must be >= 1")
    config: LstmConfig = model.spec.config
    window = list(model.train_tail[-config.window :])
    out = np.empty(h, dtype=np.float64)
    for k in range(h):
        pred, _ = lstm_forward(model.params, np.array(window))
        out[k] = pred
        window.pop(0)
        window.append(pred)
    return out


def insample_lstm(model: FittedModel, train: Series) -> tuple[np.ndarray, np.ndarray]:
    """Window predictions over the training frame."""
    config: LstmConfig = model.spec.config
    windows = make_windows(train, config.window)
    preds, _ = _forward_batch(model.params, windows.inputs)
    return windows.targets, preds
