"""Ingestion and validation of daily cumulative epidemic count data.

The on-disk format is a CSV with a header naming the columns Date, Confirmed,
Deaths and Recovered (case-insensitive, any order), one row per calendar day,
ISO-8601 dates, integer counts. Rows must be consecutive days; cumulative
columns must be non-decreasing unless corrections are explicitly allowed.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import ContractError, ParseError, StructuralError, ValidationError

logger = logging.getLogger(__name__)

TARGETS = ("confirmed", "deaths", "recovered")

SERIES_KINDS = ("cumulative", "incident")
SCALE_STATES = ("raw", "normalized")


@dataclass(frozen=True)
class Series:
    """A daily univariate series with its provenance tags.

    values are float64 and immutable. kind says whether the numbers are a
    running total ("cumulative") or per-day amounts ("incident"); scale_state
    says whether they are on the original count scale ("raw") or min-max
    normalized ("normalized"). Monotonicity of raw cumulative data is checked
    at parse time (it may be deliberately relaxed there), not here; use
    validate_series() to re-check the full invariant set.
    """

    values: np.ndarray
    start_date: date
    kind: str = "cumulative"
    scale_state: str = "raw"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ContractError("series must be a non-empty 1-d array")
        if not np.all(np.isfinite(arr)):
            raise ContractError("series values must be finite")
        if self.kind not in SERIES_KINDS:
            raise ContractError(f"unknown series kind {self.kind!r}")
        if self.scale_state not in SCALE_STATES:
            raise ContractError(f"unknown scale state {self.scale_state!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=len(self) - 1)

    def date_at(self, i: int) -> date:
        return self.start_date + timedelta(days=i)


def validate_series(s: Series) -> None:
    """Assert the full Series invariant set, including cumulative monotonicity."""
    if s.kind == "cumulative" and s.scale_state == "raw":
        diffs = np.diff(s.values)
        if diffs.size and float(diffs.min()) < 0:
            i = int(np.argmax(diffs < 0)) + 1
            raise ValidationError(
                f"cumulative series decreases at {s.date_at(i).isoformat()}"
            )


@dataclass(frozen=True)
class EpidemicDataset:
    """Parsed daily records: parallel date and count columns.

    Construction does not re-run monotonicity validation; parse_csv owns that
    so the relaxed (--allow-corrections) path can carry raw reporting
    corrections through to cumulative_to_incident.
    """

    dates: tuple[date, ...]
    confirmed: np.ndarray
    deaths: np.ndarray
    recovered: np.ndarray
    corrections_allowed: bool = field(default=False, compare=False)

    def __post_init__(self):
        n = len(self.dates)
        if n == 0:
            raise StructuralError("dataset is empty")
        for name in TARGETS:
            col = np.asarray(getattr(self, name), dtype=np.int64)
            if col.shape != (n,):
                raise ContractError(f"column {name} must have one value per date")
            col = col.copy()
            col.flags.writeable = False
            object.__setattr__(self, name, col)

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def start_date(self) -> date:
        return self.dates[0]

    @property
    def end_date(self) -> date:
        return self.dates[-1]

    def column_monotone(self, target: str) -> bool:
        col = getattr(self, target)
        return bool(np.all(np.diff(col) >= 0))


def _normalize_header(cells: list[str]) -> dict[str, int]:
    names = [c.strip().lower() for c in cells]
    wanted = ("date",) + TARGETS
    positions = {}
    for name in wanted:
        if name not in names:
            raise ParseError(f"missing required column {name!r} in header", line=1)
        positions[name] = names.index(name)
    return positions


def parse_csv(text: str | io.TextIOBase, *, allow_corrections: bool = False) -> EpidemicDataset:
    """Parse a CSV character stream into a validated EpidemicDataset.

    Accepts LF or CRLF endings and any column order. Raises ParseError with a
    line number for malformed rows, StructuralError for date gaps, duplicates
    or an empty body, and ValidationError when a cumulative column decreases,
    unless allow_corrections suppresses the monotonicity check.
    """
    if isinstance(text, io.TextIOBase):
        text = text.read()
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise StructuralError("dataset is empty")
    pos = _normalize_header(rows[0])

    dates: list[date] = []
    counts: dict[str, list[int]] = {t: [] for t in TARGETS}
    for lineno, cells in enumerate(rows[1:], start=2):
        if not cells or all(c.strip() == "" for c in cells):
            continue
        if len(cells) != len(rows[0]):
            raise ParseError(
                f"expected {len(rows[0])} fields, found {len(cells)}", line=lineno
            )
        raw_date = cells[pos["date"]].strip()
        try:
            d = date.fromisoformat(raw_date)
        except ValueError:
            raise ParseError(f"unparseable date {raw_date!r}", line=lineno) from None
        row_counts = {}
        for name in TARGETS:
            raw = cells[pos[name]].strip()
            try:
                value = int(raw)
            except ValueError:
                raise ParseError(
                    f"unparseable count {raw!r} in column {name}", line=lineno
                ) from None
            row_counts[name] = value
        dates.append(d)
        for name in TARGETS:
            counts[name].append(row_counts[name])

    if not dates:
        raise StructuralError("dataset is empty")

    for i in range(1, len(dates)):
        step = (dates[i] - dates[i - 1]).days
        if step == 0:
            raise StructuralError(f"duplicate date {dates[i].isoformat()}")
        if step < 0:
            raise StructuralError(f"dates out of order at {dates[i].isoformat()}")
        if step > 1:
            missing = dates[i - 1] + timedelta(days=1)
            raise StructuralError(f"date gap: missing {missing.isoformat()}")

    for name in TARGETS:
        col = counts[name]
        for i, value in enumerate(col):
            if value < 0:
                raise ValidationError(
                    f"negative count {value} in column {name} on {dates[i].isoformat()}"
                )
        if not allow_corrections:
            for i in range(1, len(col)):
                if col[i] < col[i - 1]:
                    raise ValidationError(
                        f"cumulative column {name} decreases on {dates[i].isoformat()}"
                    )

    return EpidemicDataset(
        dates=tuple(dates),
        confirmed=np.array(counts["confirmed"], dtype=np.int64),
        deaths=np.array(counts["deaths"], dtype=np.int64),
        recovered=np.array(counts["recovered"], dtype=np.int64),
        corrections_allowed=allow_corrections,
    )


def extract_series(ds: EpidemicDataset, target: str) -> Series:
    """Pull one cumulative column out of a dataset as a raw Series."""
    if target not in TARGETS:
        raise ContractError(f"unknown target {target!r}, expected one of {TARGETS}")
    col = getattr(ds, target)
    return Series(
        values=col.astype(np.float64),
        start_date=ds.start_date,
        kind="cumulative",
        scale_state="raw",
    )


def cumulative_to_incident(s: Series, *, clamp_corrections: bool = False) -> Series:
    """Convert a running total into per-day amounts.

    out[0] = in[0]; out[t] = in[t] - in[t-1]. A negative increment means the
    source data carried a downward correction: that is an error unless
    clamp_corrections is set, in which case the increment is clamped to 0
    (logged) and the running-sum inverse no longer reproduces the input.
    """
    if s.kind != "cumulative":
        raise ContractError("cumulative_to_incident requires a cumulative series")
    inc = np.empty_like(s.values)
    inc[0] = s.values[0]
    inc[1:] = np.diff(s.values)
    negative = inc[1:] < 0
    if negative.any():
        if not clamp_corrections:
            i = int(np.argmax(negative)) + 1
            raise ValidationError(
                f"negative increment at {s.date_at(i).isoformat()}; "
                "pass clamp_corrections to floor corrections at 0"
            )
        n_clamped = int(negative.sum())
        logger.warning("clamped %d negative increments to 0", n_clamped)
        inc[1:][negative] = 0.0
    return Series(inc, s.start_date, kind="incident", scale_state=s.scale_state)


def incident_to_cumulative(s: Series) -> Series:
    """Running-sum inverse of cumulative_to_incident."""
    if s.kind != "incident":
        raise ContractError("incident_to_cumulative requires an incident series")
    return Series(
        np.cumsum(s.values), s.start_date, kind="cumulative", scale_state=s.scale_state
    )


def train_test_split(s: Series, test_fraction: float = 0.2) -> tuple[Series, Series]:
    """Chronological split; test gets round(n * test_fraction) points, at least 1."""
    if not (0.0 < test_fraction < 1.0):
        raise ContractError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(s)
    n_test = max(1, int(math.floor(n * test_fraction + 0.5)))
    n_train = n - n_test
    if n_train < 1:
        raise ContractError(f"series of length {n} too short to split both parts non-empty")
    train = Series(s.values[:n_train], s.start_date, s.kind, s.scale_state)
    test = Series(
        s.values[n_train:],
        s.start_date + timedelta(days=n_train),
        s.kind,
        s.scale_state,
    )
    return train, test
