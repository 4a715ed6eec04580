"""Shared fixtures: the bundled dataset and the series extracted from it."""

from __future__ import annotations

import pytest

from epiforecast.data import extract_series
from epiforecast.datasets import iran_covid, iran_covid_path


@pytest.fixture(scope="session")
def iran():
    return iran_covid()


@pytest.fixture(scope="session")
def iran_path():
    return iran_covid_path()


@pytest.fixture(scope="session")
def deaths(iran):
    return extract_series(iran, "deaths")


@pytest.fixture(scope="session")
def confirmed(iran):
    return extract_series(iran, "confirmed")
