"""Forecasting toolkit for daily cumulative epidemic counts.

Parse and validate count data, normalize it, fit any of five forecaster
families, score them with a shared backtesting harness, and emit long-horizon
point forecasts. All randomness flows through numpy's seeded PCG64 generator,
so every artifact is reproducible bit for bit.
"""

from .data import (
    EpidemicDataset,
    Series,
    cumulative_to_incident,
    extract_series,
    incident_to_cumulative,
    parse_csv,
    train_test_split,
    validate_series,
)
from .errors import (
    ContractError,
    DegenerateScaleError,
    DivergenceError,
    EpiForecastError,
    ExhaustedGridError,
    ModelFileError,
    ParseError,
    SingularFitError,
    StructuralError,
    UndefinedMetricError,
    ValidationError,
)
from .metrics import fit_score, mape, mase, mse, rmse
from .transform import (
    DifferenceState,
    MinMaxScaler,
    WindowSet,
    difference,
    fit_scaler,
    integrate,
    inverse_scale,
    make_windows,
    scale,
)

__version__ = "0.1.0"
