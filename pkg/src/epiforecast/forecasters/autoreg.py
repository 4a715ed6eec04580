"""Autoregression fitted by ordinary least squares on the lag matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Series
from ..errors import ContractError, SingularFitError
from .base import ArOrder, FittedModel, ForecasterSpec


@dataclass(frozen=True)
class ArParams:
    c: float
    phi: np.ndarray  # phi[i-1] multiplies y_{t-i}


def lag_matrix(values: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Design [1, y_{t-1}, ..., y_{t-p}] and targets y_t for t = p..n-1."""
    n = values.size
    X = np.empty((n - p, p + 1), dtype=np.float64)
    X[:, 0] = 1.0
    for i in range(1, p + 1):
        X[:, i] = values[p - i : n - i]
    return X, values[p:].copy()


def fit_autoreg(train: Series, order: ArOrder) -> FittedModel:
    p = order.p
    n = len(train)
    if n < p + 2:
        raise ContractError(f"series of length {n} too short for AR({p})")
    X, y = lag_matrix(train.values, p)
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < p + 1:
        raise SingularFitError(f"AR({p}) design matrix is rank deficient (rank {rank})")
    return FittedModel(
        spec=ForecasterSpec("autoreg", order),
        params=ArParams(c=float(beta[0]), phi=beta[1:].copy()),
        train_tail=train.values[-p:],
        train_end_date=train.end_date,
    )


def forecast_autoreg(model: FittedModel, h: int) -> np.ndarray:
    if h < 1:
        raise ContractError("forecast horizon must be >= 1")
    params: ArParams = model.params
    p = params.phi.size
    history = list(model.train_tail[-p:])
    out = np.empty(h, dtype=np.float64)
    for k in range(h):
        acc = params.c
        for i in range(1, p + 1):
            acc += params.phi[i - 1] * history[-i]
        out[k] = acc
        history.append(acc)
    return out


def insample_autoreg(model: FittedModel, train: Series) -> tuple[np.ndarray, np.ndarray]:
    """One-step fitted values on the training frame: rows t = p..n-1."""
    params: ArParams = model.params
    p = params.phi.size
    X, y = lag_matrix(train.values, p)
    beta = np.concatenate(([params.c], params.phi))
    return y, X @ beta
