"""ARIMA(p, d, q) with intercept, estimated by conditional sum of squares.

The objective conditions on the first p differenced observations and treats
pre-sample moving-average errors as zero. Starting values come from the
Hannan-Rissanen two-stage regression; a Levenberg-Marquardt loop with an
analytic Jacobian refines them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..data import Series
from ..errors import ContractError, DivergenceError, ExhaustedGridError, SingularFitError
from ..metrics import mse
from ..transform import difference_values, integrate_forecast
from .base import ArimaOrder, FittedModel, ForecasterSpec
from .autoreg import lag_matrix

logger = logging.getLogger(__name__)

MAX_ITER = 200
REL_TOL = 1e-10


def css_residuals(z: np.ndarray, order: ArimaOrder, params) -> np.ndarray:
    """Conditional residuals e_t for t = p..m-1 on an already-differenced series.

    e_t = z_t - c - sum_i phi_i z_{t-i} - sum_j theta_j e_{t-j}, with e taken
    as 0 before t = p.
    """
    p, q = order.p, order.q
    beta = np.asarray(params, dtype=np.float64)
    if beta.size != 1 + p + q:
        raise ContractError(f"expected {1 + p + q} parameters, got {beta.size}")
    z = np.asarray(z, dtype=np.float64)
    m = z.size
    if m <= p:
        raise ContractError(f"series of length {m} too short for p = {p}")
    c = beta[0]
    phi = beta[1 : 1 + p]
    theta = beta[1 + p :]
    e = z[p:] - c
    for i in range(1, p + 1):
        e = e - phi[i - 1] * z[p - i : m - i]
    if q == 0:
        return e
    # sequential MA recursion; plain floats beat numpy scalars here
    base = e.tolist()
    th = theta.tolist()
    eps = [0.0] * len(base)
    for t in range(len(base)):
        acc = base[t]
        for j in range(1, q + 1):
            if t - j >= 0:
                acc -= th[j - 1] * eps[t - j]
        eps[t] = acc
    return np.array(eps, dtype=np.float64)


def arima_css_objective(z: np.ndarray, order: ArimaOrder, params) -> float:
    """Sum of squared conditional residuals; with q = 0 this is the AR objective."""
    e = css_residuals(z, order, params)
    # far-from-stationary candidates overflow to inf here; callers treat a
    # non-finite objective as divergence, so silence the intermediate warning
    with np.errstate(over="ignore"):
        return float(e @ e)


def _css_jacobian(z: np.ndarray, order: ArimaOrder, beta: np.ndarray):
    """Residuals and d(residual)/d(params); each column obeys the MA recursion."""
    p, q = order.p, order.q
    m = z.size
    T = m - p
    eps = css_residuals(z, order, beta)
    k = 1 + p + q
    J = np.empty((T, k), dtype=np.float64)
    # base sensitivities before the recursive MA feedback
    J[:, 0] = -1.0
    for i in range(1, p + 1):
        J[:, i] = -z[p - i : m - i]
    if q == 0:
        return eps, J
    eps_l = eps.tolist()
    theta = beta[1 + p :].tolist()
    for col in range(k):
        if col < 1 + p:
            base = J[:, col].tolist()
        else:
            j_lag = col - p  # theta_{j_lag}
            base = [-(eps_l[t - j_lag]) if t - j_lag >= 0 else 0.0 for t in range(T)]
        u = [0.0] * T
        for t in range(T):
            acc = base[t]
            for j in range(1, q + 1):
                if t - j >= 0:
                    acc -= theta[j - 1] * u[t - j]
            u[t] = acc
        J[:, col] = u
    return eps, J


def _hannan_rissanen_init(z: np.ndarray, order: ArimaOrder) -> np.ndarray:
    """Two-stage starting values: long AR, then regression on lagged residuals."""
    p, q = order.p, order.q
    m = z.size
    if q == 0:
        if p == 0:
            return np.array([float(np.mean(z))])
        X, y = lag_matrix(z, p)
        beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        if rank < p + 1:
            raise SingularFitError(f"ARIMA AR stage is rank deficient (p = {p})")
        return beta
    fallback = np.concatenate(([float(np.mean(z))], np.zeros(p + q)))
    long_order = max(p + q, int(round(12.0 * (m / 100.0) ** 0.25)))
    long_order = min(long_order, (m - q - p - 2) // 2)
    if long_order < 1:
        return fallback
    X, y = lag_matrix(z, long_order)
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < long_order + 1:
        return fallback
    resid = np.zeros(m, dtype=np.float64)
    resid[long_order:] = y - X @ beta
    start = long_order + q
    rows = m - start
    if rows < 1 + p + q + 1:
        return fallback
    D = np.empty((rows, 1 + p + q), dtype=np.float64)
    D[:, 0] = 1.0
    for i in range(1, p + 1):
        D[:, i] = z[start - i : m - i]
    for j in range(1, q + 1):
        D[:, p + j] = resid[start - j : m - j]
    beta2, _, rank2, _ = np.linalg.lstsq(D, z[start:], rcond=None)
    if rank2 < 1 + p + q:
        return fallback
    return beta2


def _root_warnings(order: ArimaOrder, beta: np.ndarray) -> tuple[str, ...]:
    """Flag AR roots inside the unit circle (and MA likewise); never fatal."""
    p, q = order.p, order.q
    notes = []
    if p:
        coeffs = np.concatenate((-beta[1 : 1 + p][::-1], [1.0]))
        roots = np.roots(coeffs)
        if roots.size and np.min(np.abs(roots)) < 1.0:
            notes.append("ar roots inside the unit circle: forecasts are non-stationary")
    if q:
        coeffs = np.concatenate((beta[1 + p :][::-1], [1.0]))
        roots = np.roots(coeffs)
        if roots.size and np.min(np.abs(roots)) < 1.0:
            notes.append("ma roots inside the unit circle: representation is non-invertible")
    return tuple(notes)


@dataclass(frozen=True)
class ArimaParams:
    c: float
    phi: np.ndarray
    theta: np.ndarray
    resid_tail: np.ndarray  # last q conditional residuals, chronological
    warnings: tuple[str, ...] = ()


def fit_arima(train: Series, order: ArimaOrder) -> FittedModel:
    p, d, q = order.p, order.d, order.q
    n = len(train)
    if n < p + q + d + 2:
        raise ContractError(f"series of length {n} too short for ARIMA({p},{d},{q})")
    z, _ = difference_values(train.values, d)
    beta = _hannan_rissanen_init(z, order)
    s = arima_css_objective(z, order, beta)
    if not np.isfinite(s):
        raise DivergenceError("ARIMA starting values give a non-finite objective")

    lam = 1e-3
    identity = np.eye(beta.size)
    for _ in range(MAX_ITER):
        eps, J = _css_jacobian(z, order, beta)
        g = J.T @ eps
        A = J.T @ J
        accepted = False
        rel = 0.0
        for _ in range(30):
            try:
                delta = np.linalg.solve(A + lam * identity, -g)
            except np.linalg.LinAlgError:
                lam = min(lam * 10.0, 1e12)
                continue
            candidate = beta + delta
            s_new = arima_css_objective(z, order, candidate)
            if np.isfinite(s_new) and s_new < s:
                rel = (s - s_new) / max(s, np.finfo(float).tiny)
                beta = candidate
                s = s_new
                lam = max(lam / 10.0, 1e-12)
                accepted = True
                break
            lam = min(lam * 10.0, 1e12)
        if not accepted or rel < REL_TOL:
            break
    if not np.isfinite(s):
        raise DivergenceError("ARIMA optimization produced a non-finite objective")

    eps = css_residuals(z, order, beta)
    params = ArimaParams(
        c=float(beta[0]),
        phi=beta[1 : 1 + p].copy(),
        theta=beta[1 + p :].copy(),
        resid_tail=eps[len(eps) - q :].copy() if q else np.empty(0),
        warnings=_root_warnings(order, beta),
    )
    for note in params.warnings:
        logger.warning("ARIMA(%d,%d,%d): %s", p, d, q, note)
    return FittedModel(
        spec=ForecasterSpec("arima", order),
        params=params,
        train_tail=train.values[-(p + d + 1) :],
        train_end_date=train.end_date,
    )


def forecast_arima(model: FittedModel, h: int) -> np.ndarray:
    if h < 1:
        raise ContractError("forecast horizon must be >= 1")
    order: ArimaOrder = model.spec.config
    params: ArimaParams = model.params
    p, d, q = order.p, order.d, order.q
    tail = model.train_tail
    z_tail, _ = difference_values(tail, d) if d else (tail, None)
    z_hist = list(z_tail[-p:]) if p else []
    resid = list(params.resid_tail)
    diffs = np.empty(h, dtype=np.float64)
    for k in range(h):
        acc = params.c
        for i in range(1, p + 1):
            acc += params.phi[i - 1] * z_hist[-i]
        for j in range(1, q + 1):
            lag = k - j
            if lag < 0 and len(resid) + lag >= 0:
                acc += params.theta[j - 1] * resid[lag]
        diffs[k] = acc
        if p:
            z_hist.append(acc)
    return integrate_forecast(diffs, tail, d)


def insample_arima(model: FittedModel, train: Series) -> tuple[np.ndarray, np.ndarray]:
    """One-step fitted levels: the level error equals the differenced residual."""
    order: ArimaOrder = model.spec.config
    params: ArimaParams = model.params
    z, _ = difference_values(train.values, order.d)
    beta = np.concatenate(([params.c], params.phi, params.theta))
    eps = css_residuals(z, order, beta)
    actual = train.values[order.d + order.p :]
    return actual, actual - eps


# Candidates whose AR polynomial has a root at or near the unit circle produce
# forecasts that either diverge or imitate a differenced model with an
# ill-determined root; standard order-selection practice rejects them.
AR_ROOT_LIMIT = 0.97
# Scores within this relative band of the best are treated as ties and broken
# toward the simpler order (a one-standard-error-style parsimony rule).
NEAR_TIE_FACTOR = 0.15


def _max_ar_root_modulus(phi: np.ndarray) -> float:
    """Largest modulus among the reciprocal roots of the AR polynomial."""
    if phi.size == 0:
        return 0.0
    coeffs = np.concatenate((-phi[::-1], [1.0]))
    mods = np.abs(np.roots(coeffs))
    if mods.size == 0 or mods.min() == 0.0:
        return 0.0
    return float(1.0 / mods.min())


def _validation_onestep_mse(model: FittedModel, train: Series, validation: Series) -> float:
    """Mean squared one-step-ahead error over the validation tail.

    Coefficients stay frozen from the training fit; each prediction uses
    actual values up to the previous day. Because the one-step level
    prediction equals actual minus the conditional residual for any d, the
    scores are comparable across differencing orders.
    """
    order = model.spec.config
    full = np.concatenate([train.values, validation.values])
    z, _ = difference_values(full, order.d)
    params = model.params
    beta = np.concatenate(([params.c], params.phi, params.theta))
    eps = css_residuals(z, order, beta)
    tail = eps[-len(validation) :]
    # near-unstable candidates overflow to inf; the caller ranks them last or
    # skips them, so silence the intermediate warning on that handled path
    with np.errstate(over="ignore"):
        return float(np.mean(tail * tail))


def grid_search_arima(
    train: Series, validation: Series, p_max: int, q_max: int
) -> tuple[ArimaOrder, FittedModel, float]:
    """Exhaustive (p, d, q) search scored on a held-out validation tail.

    Each candidate is fitted on train only and scored by the mean squared
    one-step-ahead error of its frozen coefficients rolled across the
    validation segment. Candidates whose fitted AR part is non-stationary or
    nearly so (reciprocal root modulus above AR_ROOT_LIMIT) are skipped, as
    are candidates that fail to fit; skips are logged, never fatal. Among
    candidates scoring within NEAR_TIE_FACTOR of the best the simplest order
    wins: smaller p + d + q, then smaller d, then smaller p. Returns the
    chosen order, its fitted model, and its validation MSE.
    """
    if p_max < 0 or q_max < 0:
        raise ContractError("p_max and q_max must be >= 0")
    results = []
    skipped = []
    for p in range(p_max + 1):
        for d in (0, 1):
            for q in range(q_max + 1):
                if p + d + q == 0:
                    continue
                order = ArimaOrder(p, d, q)
                try:
                    model = fit_arima(train, order)
                    root = _max_ar_root_modulus(model.params.phi)
                    if root > AR_ROOT_LIMIT:
                        raise DivergenceError(
                            f"ar reciprocal root modulus {root:.4f} exceeds {AR_ROOT_LIMIT}"
                        )
                    score = _validation_onestep_mse(model, train, validation)
                except Exception as exc:  # noqa: BLE001 - candidates must never be fatal
                    skipped.append((order, str(exc)))
                    logger.warning("skipping ARIMA(%d,%d,%d): %s", p, d, q, exc)
                    continue
                results.append((score, order, model))
    if not results:
        raise ExhaustedGridError(
            f"all {len(skipped)} ARIMA candidates failed; last: {skipped[-1][1]}"
        )
    best_score = min(score for score, _, _ in results)
    threshold = best_score * (1.0 + NEAR_TIE_FACTOR)
    tied = [entry for entry in results if entry[0] <= threshold]
    score, order, model = min(
        tied, key=lambda e: (e[1].p + e[1].d + e[1].q, e[1].d, e[1].p, e[0])
    )
    return order, model, score
