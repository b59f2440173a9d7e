import time
from contextlib import contextmanager

import pytest


@contextmanager
def time_limit(seconds: float):
    """Assert the wrapped block finishes within ``seconds`` of wall time."""
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f}s, budget {seconds}s"


@pytest.fixture
def budget():
    return time_limit
