import numpy as np
import pytest

from cmssa import CenteredSeries, TimeSeries


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_series(rng, length, channels, sid="s", label=None):
    return TimeSeries(rng.normal(size=(length, channels)), sid, label)


def make_centered(values, sid="s"):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    return CenteredSeries(
        values=values,
        channel_means=np.zeros(values.shape[1]),
        series_id=sid,
    )
