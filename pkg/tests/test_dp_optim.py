"""
Tests for clipping, noisy aggregation, clipping decay and the optimiser steps
"""

import numpy as np
import pytest

from dpgan.autodiff import GradientVector
from dpgan.dp_optim import (
    AdamState, DpSgdConfig, adam_step, clip, decay_clip, noisy_aggregate, sample_lot, sgd_step,
)
from dpgan.errors import ConfigError, NonFiniteError, ShapeError


def _vector(**entries):
    return GradientVector({k: np.asarray(v, dtype=float) for k, v in entries.items()})


def test_config_defaults_and_validation():
    cfg = DpSgdConfig(clip_bound=2.0)
    assert cfg.decay_floor == pytest.approx(2e-3)
    for bad in ({'clip_bound': 0.0}, {'noise_scale': -1.0}, {'lot_size': 0},
                {'learning_rate': 0.0}, {'clip_decay': 0.0}, {'clip_decay': 1.01}):
        with pytest.raises(ConfigError):
            DpSgdConfig(**bad)


def test_clip_scales_long_gradients_onto_the_ball():
    g = _vector(a=[[3.0, 0.0]], b=[4.0])
    clipped = clip(g, 1.0)
    assert clipped.norm == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(clipped.entries['a'], [[0.6, 0.0]])
    np.testing.assert_allclose(clipped.entries['b'], [0.8])


def test_clip_leaves_short_gradients_unchanged():
    g = _vector(a=[0.1, 0.2])
    assert clip(g, 1.0) is g


def test_clip_rejects_non_finite_gradients():
    with pytest.raises(NonFiniteError):
        clip(_vector(a=[np.nan, 1.0]), 1.0)


def test_noiseless_aggregate_divides_by_fixed_lot_size():
    cfg = DpSgdConfig(clip_bound=1.0, noise_scale=0.0, lot_size=4)
    rng = np.random.default_rng(0)
    state = rng.bit_generator.state

    total = noisy_aggregate([_vector(a=[1.0, 2.0]), _vector(a=[3.0, -2.0])], cfg, rng)

    np.testing.assert_allclose(total.entries['a'], [1.0, 0.0])
    assert rng.bit_generator.state == state


def test_empty_lot_aggregates_to_noise_only():
    cfg = DpSgdConfig(clip_bound=0.5, noise_scale=2.0, lot_size=1)
    noise = noisy_aggregate([], cfg, np.random.default_rng(11), shapes={'w': (200, 100)})
    assert noise.entries['w'].shape == (200, 100)
    assert noise.entries['w'].std() == pytest.approx(1.0, rel=0.03)
    with pytest.raises(ShapeError):
        noisy_aggregate([], cfg, np.random.default_rng(11))


def test_noise_std_is_sigma_c_over_lot_size():
    cfg = DpSgdConfig(clip_bound=0.5, noise_scale=2.0, lot_size=8)
    zero = _vector(w=np.zeros((200, 100)))
    noise = noisy_aggregate([zero, zero], cfg, np.random.default_rng(12))
    assert noise.entries['w'].mean() == pytest.approx(0.0, abs=0.005)
    assert noise.entries['w'].std() == pytest.approx(2.0 * 0.5 / 8, rel=0.03)


def test_noisy_aggregate_is_reproducible_per_seed():
    cfg = DpSgdConfig(noise_scale=1.0, lot_size=8)
    grads = [_vector(a=[0.5, 0.5]), _vector(a=[-0.2, 0.1])]
    first = noisy_aggregate(grads, cfg, np.random.default_rng(5))
    second = noisy_aggregate(grads, cfg, np.random.default_rng(5))
    np.testing.assert_array_equal(first.entries['a'], second.entries['a'])


def test_noisy_aggregate_rejects_mismatched_gradients():
    cfg = DpSgdConfig(noise_scale=0.0)
    with pytest.raises(ShapeError):
        noisy_aggregate([_vector(a=[1.0]), _vector(a=[1.0, 2.0])], cfg, np.random.default_rng(0))


def test_decay_clip_closed_form():
    cfg = DpSgdConfig(clip_bound=1.0, noise_scale=1.5, lot_size=32, clip_decay=0.99)
    for _ in range(100):
        cfg = decay_clip(cfg)
    assert cfg.clip_bound == pytest.approx(0.99 ** 100, rel=1e-12)
    assert (cfg.noise_scale, cfg.lot_size) == (1.5, 32)


def test_decay_clip_stops_at_floor():
    cfg = DpSgdConfig(clip_bound=1.0, clip_decay=0.5, decay_floor=0.1)
    for _ in range(10):
        cfg = decay_clip(cfg)
    assert cfg.clip_bound == 0.1
    undecayed = DpSgdConfig(clip_bound=1.0)
    assert decay_clip(undecayed) is undecayed


def test_sgd_step():
    params = {'w': np.array([1.0, 2.0])}
    updated = sgd_step(params, _vector(w=[0.5, -1.0]), 0.1)
    np.testing.assert_allclose(updated['w'], [0.95, 2.1])
    np.testing.assert_array_equal(params['w'], [1.0, 2.0])
    with pytest.raises(ShapeError):
        sgd_step(params, _vector(v=[0.5, -1.0]), 0.1)


def test_adam_unit_step_for_constant_gradient():
    params = {'w': np.array([0.0, 0.0])}
    state = AdamState.zeros(params, beta1=0.5, beta2=0.9)
    g = _vector(w=[3.0, -0.02])
    learning_rate = 1e-3
    for _ in range(1000):
        previous = params['w']
        state, params = adam_step(state, params, g, learning_rate)
    step = np.abs(params['w'] - previous)
    np.testing.assert_allclose(step, [learning_rate, learning_rate], rtol=0.01)
    assert state.step == 1000


def test_adam_zero_gradient_first_step_keeps_parameters():
    params = {'w': np.array([0.3, -1.2]), 'b': np.array([[2.0]])}
    state = AdamState.zeros(params, beta1=0.0, beta2=0.9)
    state, updated = adam_step(state, params, _vector(w=[0.0, 0.0], b=[[0.0]]), 1e-3)
    for name, value in params.items():
        np.testing.assert_array_equal(updated[name], value)
    assert state.step == 1


def test_adam_state_copy_is_independent():
    state = AdamState.zeros({'w': np.zeros(2)})
    clone = state.copy()
    clone.first_moment['w'][0] = 1.0
    assert state.first_moment['w'][0] == 0.0


def test_sample_lot_rate():
    rng = np.random.default_rng(2)
    sizes = [len(sample_lot(100_000, 0.01, rng)) for _ in range(5)]
    assert all(abs(size - 1000) < 160 for size in sizes)
    assert len(sample_lot(50, 0.0, rng)) == 0
    np.testing.assert_array_equal(sample_lot(50, 1.0, rng), np.arange(50))
    with pytest.raises(ConfigError):
        sample_lot(10, 1.5, rng)


def test_sample_lot_is_poisson_over_many_draws():
    rng = np.random.default_rng(21)
    n, q, draws = 1000, 0.05, 2000
    hits = np.zeros(n)
    sizes = []
    for _ in range(draws):
        lot = sample_lot(n, q, rng)
        assert np.all(np.diff(lot) > 0)
        hits[lot] += 1
        sizes.append(len(lot))
    sizes = np.array(sizes)
    # lot size is Binomial(n, q)
    assert sizes.mean() == pytest.approx(n * q, abs=1.0)
    assert sizes.var() == pytest.approx(n * q * (1 - q), rel=0.15)
    # every record joins at rate q
    assert np.all(np.abs(hits / draws - q) < 0.03)
