"""
Shared fixtures: small architectures and datasets that train in seconds
"""

from pathlib import Path

import pytest

from dpgan.data import (
    encode, gaussian_mixture_schema, make_gaussian_mixture, make_timeseries, timeseries_schema,
)
from dpgan.dp_optim import DpSgdConfig
from dpgan.gan import RECURRENT, GanArchitecture, build_model
from dpgan.training import TrainLoopConfig

TEST_DATA = Path(__file__).parent / 'data'


@pytest.fixture
def test_data_dir():
    return TEST_DATA


@pytest.fixture
def mixture_schema():
    return gaussian_mixture_schema()


@pytest.fixture
def mixture_table():
    return make_gaussian_mixture(60, seed=0)


@pytest.fixture
def mixture_dataset(mixture_table, mixture_schema):
    return encode(mixture_table, mixture_schema)


@pytest.fixture
def small_arch(mixture_schema):
    return GanArchitecture(
        mixture_schema, noise_dim=4, hidden_sizes=(8,), critic_hidden_sizes=(8,), activation='tanh',
    )


@pytest.fixture
def small_model(small_arch):
    return build_model(small_arch, seed=3)


@pytest.fixture
def series_schema():
    return timeseries_schema(length=6, n_regions=3)


@pytest.fixture
def series_arch(series_schema):
    return GanArchitecture(
        series_schema, generator_kind=RECURRENT, noise_dim=3, lstm_hidden=4,
        critic_hidden_sizes=(6,), activation='tanh',
    )


@pytest.fixture
def series_dataset(series_schema):
    return encode(make_timeseries(24, length=6, seed=1, n_regions=3), series_schema)


def loop_config(**overrides):
    """A short private run: 10-row lots, two critic steps per generator step"""
    dp = overrides.pop('dp', DpSgdConfig(clip_bound=1.0, noise_scale=1.0, lot_size=10, learning_rate=0.05))
    settings = dict(
        dp=dp, epsilon_target=1e6, n_disc=2, max_generator_iterations=3, metrics_every=1,
        generator_batch=8, workers=1,
    )
    settings.update(overrides)
    return TrainLoopConfig(**settings)


@pytest.fixture
def make_loop_config():
    return loop_config
