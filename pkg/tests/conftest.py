import numpy as np
import pytest

from hazseg.data import SufficientStats


def random_stats(rng: np.random.Generator, n_bins: int, allow_empty: bool = False) -> SufficientStats:
    """Well-scaled sufficient statistics for kernel and solver tests."""
    exposure = rng.uniform(0.5, 5.0, n_bins)
    events = rng.poisson(exposure * rng.uniform(0.2, 2.0, n_bins)) + (0 if allow_empty else 1)
    if allow_empty:
        empty = rng.random(n_bins) < 0.15
        exposure[empty] = 0.0
        events[empty] = 0
    return SufficientStats(events.astype(np.int64), exposure, n=max(int(events.sum()), 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
