"""Shared fixtures for the truncated-evi test suite."""

import numpy as np
import pytest

from estimators import ObservedSample
from models import Burr, Pareto


@pytest.fixture
def rng():
    """Fixed RNG for reproducible tests."""
    return np.random.default_rng(42)


@pytest.fixture
def hand_sample():
    """The two-pair sample {(1,3),(2,2)} used for hand-enumerated oracles."""
    return ObservedSample.from_pairs([(1.0, 3.0), (2.0, 2.0)])


@pytest.fixture
def pareto_pair():
    """Exact power tails: gamma1 = 1/4, gamma2 = 1/2, p = 2/3."""
    return Pareto(0.25, 1.0), Pareto(0.5, 1.0)


@pytest.fixture
def burr_pair():
    """Strong truncation configuration, alpha = 2/3."""
    return Burr(10.0, 4.0, 1.0), Burr(10.0, 2.0, 1.0)


@pytest.fixture
def mild_burr_pair():
    """Mild truncation configuration, alpha = 8/9."""
    return Burr(10.0, 4.0, 1.0), Burr(10.0, 1.0, 0.5)


@pytest.fixture
def untruncated_sample(rng):
    """n = 200 Burr(10,4,1) draws with every y far above the data."""
    x = Burr(10.0, 4.0, 1.0).sample(rng, 200)
    return ObservedSample(x, np.full(200, 1e12))
