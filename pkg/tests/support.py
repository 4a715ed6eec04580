"""Tiny construction helpers shared by test modules."""

from __future__ import annotations

from datetime import date

import numpy as np

from epiforecast.data import Series

START = date(2020, 2, 26)


def series(values, kind="incident", scale_state="normalized", start=START) -> Series:
    """Shorthand for synthetic test series on the normalized scale."""
    return Series(np.asarray(values, dtype=np.float64), start, kind, scale_state)
