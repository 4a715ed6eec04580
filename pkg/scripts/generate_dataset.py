"""Regenerate the bundled daily count dataset (deterministic).

The file is a synthetic reconstruction of Iran's first pandemic year at daily
resolution: multi-wave incidence curves with weekly reporting seasonality and
mild noise, calibrated so the cumulative totals at both endpoints match the
officially reported aggregates. Row-level values between the endpoints are
modeled, not transcribed.

Usage: python scripts/generate_dataset.py
"""

from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "epiforecast" / "datasets" / "iran_covid.csv"

START = date(2020, 2, 26)
N_DAYS = 381  # through 2021-03-12

# cumulative totals reported for the first and last day
ANCHORS = {
    "confirmed": (139, 1_723_470),
    "deaths": (19, 61_069),
    "recovered": (49, 1_470_167),
}

SEED = 20210312


def bump(t: np.ndarray, mu: float, sigma: float, amp: float) -> np.ndarray:
    return amp * np.exp(-((t - mu) ** 2) / (2.0 * sigma**2))


def confirmed_intensity(t: np.ndarray) -> np.ndarray:
    return (
        bump(t, 33, 13, 3.2)      # spring wave
        + bump(t, 99, 16, 3.6)    # early-summer wave
        + bump(t, 160, 22, 2.6)   # late-summer plateau
        + bump(t, 275, 30, 14.0)  # autumn wave
        + bump(t, 381, 40, 7.5)   # late-winter rise
        + 0.35
    )


def deaths_intensity(t: np.ndarray) -> np.ndarray:
    return (
        bump(t, 43, 14, 0.145)
        + bump(t, 112, 18, 0.125)
        + bump(t, 170, 24, 0.215)
        + bump(t, 283, 30, 0.46)
        + bump(t, 390, 44, 0.085)
        + 0.012
    )


def recovered_intensity(t: np.ndarray) -> np.ndarray:
    # recoveries trail confirmations by roughly two weeks
    return confirmed_intensity(t - 13.0)


def weekly_pattern(t: np.ndarray, depth: float, phase: float) -> np.ndarray:
    return 1.0 + depth * np.sin(2.0 * np.pi * (t + phase) / 7.0)


def build_column(intensity, depth: float, phase: float, noise: float, rng, total: int) -> np.ndarray:
    """Daily increments for days 1..N-1, integer, summing exactly to total."""
    t = np.arange(1, N_DAYS, dtype=np.float64)
    lam = intensity(t) * weekly_pattern(t, depth, phase)
    lam = lam * np.clip(1.0 + noise * rng.standard_normal(t.size), 0.4, 1.6)
    lam = np.maximum(lam, 1e-9)
    lam *= total / lam.sum()
    cum = np.floor(np.cumsum(lam) + 0.5)
    cum[-1] = total
    inc = np.diff(np.concatenate(([0.0], cum)))
    return inc.astype(np.int64)


def main() -> None:
    rng = np.random.default_rng(SEED)
    columns = {}
    plans = {
        "confirmed": (confirmed_intensity, 0.10, 1.3, 0.06),
        "deaths": (deaths_intensity, 0.06, 2.1, 0.05),
        "recovered": (recovered_intensity, 0.12, 3.8, 0.07),
    }
    for name, (intensity, depth, phase, noise) in plans.items():
        first, last = ANCHORS[name]
        inc = build_column(intensity, depth, phase, noise, rng, last - first)
        cum = first + np.concatenate(([0], np.cumsum(inc)))
        assert cum[0] == first and cum[-1] == last
        assert np.all(np.diff(cum) >= 0)
        columns[name] = cum

    lines = ["Date,Confirmed,Deaths,Recovered"]
    for i in range(N_DAYS):
        day = START + timedelta(days=i)
        lines.append(
            f"{day.isoformat()},{columns['confirmed'][i]},"
            f"{columns['deaths'][i]},{columns['recovered'][i]}"
        )
    OUT.write_text("\n".join(lines) + "\n")
    print(f"wrote {OUT} ({N_DAYS} rows, {START}..{START + timedelta(days=N_DAYS - 1)})")


if __name__ == "__main__":
    main()
