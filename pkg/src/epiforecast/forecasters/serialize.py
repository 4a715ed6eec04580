"""Versioned model files: JSON key-value trees with exact float round trip.

Floats are written in Python's shortest round-trip decimal form, so a loaded
model forecasts bit-identically to the one saved. Unknown schema versions and
truncated files are refused.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from datetime import date
from pathlib import Path

import numpy as np

from ..errors import ModelFileError
from ..transform import DifferenceState, MinMaxScaler
from .base import (
    AdditiveConfig,
    ArimaOrder,
    ArOrder,
    FittedModel,
    ForecasterSpec,
    LstmConfig,
    MlpConfig,
)
from .additive import AdditiveParams
from .arima import ArimaParams
from .autoreg import ArParams
from .lstm import LstmLayerParams, LstmParameters
from .mlp import MlpParams

SCHEMA_VERSION = 1

_CONFIG_TYPES = {
    "autoreg": ArOrder,
    "arima": ArimaOrder,
    "lstm": LstmConfig,
    "mlp": MlpConfig,
    "additive": AdditiveConfig,
}


def _params_to_dict(kind: str, params) -> dict:
    if kind == "autoreg":
        return {"c": params.c, "phi": params.phi.tolist()}
    if kind == "arima":
        return {
            "c": params.c,
            "phi": params.phi.tolist(),
            "theta": params.theta.tolist(),
            "resid_tail": params.resid_tail.tolist(),
            "warnings": list(params.warnings),
        }
    if kind == "lstm":
        return {
            "layers": [{"W": l.W.tolist(), "b": l.b.tolist()} for l in params.layers],
            "head_w": params.head_w.tolist(),
            "head_b": params.head_b,
            "loss_history": list(params.loss_history),
        }
    if kind == "mlp":
        return {
            "hidden_w": None if params.hidden_w is None else params.hidden_w.tolist(),
            "hidden_b": None if params.hidden_b is None else params.hidden_b.tolist(),
            "out_w": params.out_w.tolist(),
            "out_b": params.out_b,
            "next_dow": params.next_dow,
            "loss_history": list(params.loss_history),
        }
    if kind == "additive":
        return {
            "beta": params.beta.tolist(),
            "changepoints": params.changepoints.tolist(),
            "n_train": params.n_train,
        }
    raise ModelFileError(f"unknown forecaster kind {kind!r}")


def _params_from_dict(kind: str, d: dict):
    arr = lambda x: np.asarray(x, dtype=np.float64)  # noqa: E731
    if kind == "autoreg":
        return ArParams(c=float(d["c"]), phi=arr(d["phi"]))
    if kind == "arima":
        return ArimaParams(
            c=float(d["c"]),
            phi=arr(d["phi"]),
            theta=arr(d["theta"]),
            resid_tail=arr(d["resid_tail"]),
            warnings=tuple(d["warnings"]),
        )
    if kind == "lstm":
        return LstmParameters(
            layers=tuple(
                LstmLayerParams(W=arr(l["W"]), b=arr(l["b"])) for l in d["layers"]
            ),
            head_w=arr(d["head_w"]),
            head_b=float(d["head_b"]),
            loss_history=tuple(d["loss_history"]),
        )
    if kind == "mlp":
        return MlpParams(
            hidden_w=None if d["hidden_w"] is None else arr(d["hidden_w"]),
            hidden_b=None if d["hidden_b"] is None else arr(d["hidden_b"]),
            out_w=arr(d["out_w"]),
            out_b=float(d["out_b"]),
            next_dow=d["next_dow"],
            loss_history=tuple(d["loss_history"]),
        )
    if kind == "additive":
        return AdditiveParams(
            beta=arr(d["beta"]),
            changepoints=arr(d["changepoints"]),
            n_train=int(d["n_train"]),
        )
    raise ModelFileError(f"unknown forecaster kind {kind!r}")


def model_to_dict(model: FittedModel) -> dict:
    kind = model.spec.kind
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "seed": model.spec.seed,
        "target": model.target,
        "train_end_date": (
            None if model.train_end_date is None else model.train_end_date.isoformat()
        ),
        "config": asdict(model.spec.config),
        "scaler": {"min": model.scaler.min, "max": model.scaler.max},
        "diff_state": (
            None
            if model.diff_state is None
            else {"order": model.diff_state.order, "heads": list(model.diff_state.heads)}
        ),
        "train_tail": model.train_tail.tolist(),
        "params": _params_to_dict(kind, model.params),
    }


def model_from_dict(doc: dict) -> FittedModel:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelFileError(f"unsupported model schema version {version!r}")
    try:
        kind = doc["kind"]
        config_type = _CONFIG_TYPES[kind]
        config = config_type(**doc["config"])
        spec = ForecasterSpec(kind, config, int(doc["seed"]))
        diff = doc["diff_state"]
        return FittedModel(
            spec=spec,
            params=_params_from_dict(kind, doc["params"]),
            scaler=MinMaxScaler(float(doc["scaler"]["min"]), float(doc["scaler"]["max"])),
            train_tail=np.asarray(doc["train_tail"], dtype=np.float64),
            diff_state=(
                None
                if diff is None
                else DifferenceState(order=int(diff["order"]), heads=tuple(diff["heads"]))
            ),
            target=doc["target"],
            train_end_date=(
                None
                if doc["train_end_date"] is None
                else date.fromisoformat(doc["train_end_date"])
            ),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ModelFileError(f"malformed model file: {exc}") from exc


def save_model(model: FittedModel, path: str | Path) -> None:
    doc = model_to_dict(model)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path: str | Path) -> FittedModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"truncated or corrupt model file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFileError(f"malformed model file {path}: not a key-value tree")
    return model_from_dict(doc)
