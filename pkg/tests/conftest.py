import pathlib

import pytest

from twistrank.cache import get_ap_table
from twistrank.fixtures import load_curves

DATA = pathlib.Path(__file__).parent / "data"
CACHE = pathlib.Path(__file__).parent / "_cache"

BIG_P = 10 ** 6


@pytest.fixture(scope="session")
def fixtures():
    return load_curves(DATA / "curves.csv")


@pytest.fixture(scope="session")
def tables(fixtures):
    """P = 10^6 coefficient tables for every fixture curve.

    Built once and kept in tests/_cache; a cold run spends a couple of
    minutes per curve here, warm runs load in milliseconds.
    """
    CACHE.mkdir(exist_ok=True)
    return {label: get_ap_table(f.curve, BIG_P, overrides=f.ap_overrides,
                                cache_dir=CACHE)
            for label, f in fixtures.items()}


@pytest.fixture(scope="session")
def small_tables(fixtures):
    """Fresh (uncached) P = 10^4 tables, exercising the build path."""
    from twistrank.curve import build_ap_table
    return {label: build_ap_table(f.curve, 10 ** 4, overrides=f.ap_overrides)
            for label, f in fixtures.items()}
