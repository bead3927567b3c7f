"""Shared fixtures: expensive panel-scale simulations are run once per
session and reused across test modules."""

import warnings

import numpy as np
import pytest

from slmsqueeze.config import ExperimentConfig
from slmsqueeze.pipeline import simulate_mode
from slmsqueeze.propagation import AliasingWarning


@pytest.fixture(scope="session")
def default_config():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def sim_cache(default_config):
    """Lazy per-mode simulation results under the default configuration."""
    cache = {}

    def get(token):
        if token not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", AliasingWarning)
                cache[token] = simulate_mode(default_config.with_mode(token))
        return cache[token]

    return get


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20250810)
