"""
Tests for the generator, critic, WGAN-GP losses and sampling
"""

import numpy as np
import pandas as pd
import pytest

from dpgan.errors import ConfigError, SchemaError, ShapeError
from dpgan.gan import (
    FORWARD_CHUNK, RECURRENT, GanArchitecture, GanModel, HeadSpec, RngStreams, build_model,
    critic_objective, critic_parameter_shapes, critic_scores, discriminator_loss, generate,
    generator_forward, generator_loss, generator_objective, generator_parameter_shapes, gradient_penalty,
    interpolate, sample_categories,
)


def _perturbed(model, group, name, index, delta):
    params = {k: v.copy() for k, v in getattr(model, group).items()}
    params[name][index] += delta
    clone = model.copy()
    setattr(clone, group, params)
    return clone


def _numeric_gradient(model, group, objective, step=1e-5):
    numeric = {}
    for name, value in getattr(model, group).items():
        grad = np.zeros_like(value)
        for index in np.ndindex(value.shape):
            upper = objective(_perturbed(model, group, name, index, step))
            lower = objective(_perturbed(model, group, name, index, -step))
            grad[index] = (upper - lower) / (2.0 * step)
        numeric[name] = grad
    return numeric


def test_architecture_derives_heads_from_schema(small_arch):
    assert [(h.name, h.kind, h.width) for h in small_arch.heads] == [
        ('x', 'tanh', 1), ('y', 'tanh', 1), ('component', 'softmax', 6),
    ]
    assert small_arch.output_width == 8
    assert small_arch.softmax_groups == [(2, 8)]
    assert small_arch.series_length is None
    assert GanArchitecture.from_dict(small_arch.to_dict()) == small_arch


def test_architecture_validation(mixture_schema):
    with pytest.raises(SchemaError):
        GanArchitecture(mixture_schema, heads=(HeadSpec('x', 'tanh', 1),))
    with pytest.raises(SchemaError):
        GanArchitecture(mixture_schema, heads=(
            HeadSpec('x', 'tanh', 1), HeadSpec('y', 'tanh', 1), HeadSpec('component', 'tanh', 6),
        ))
    with pytest.raises(ConfigError, match="series column"):
        GanArchitecture(mixture_schema, generator_kind=RECURRENT)
    with pytest.raises(ConfigError):
        GanArchitecture(mixture_schema, activation='sigmoid')


def test_build_model_is_seeded(small_arch):
    first = build_model(small_arch, seed=11)
    second = build_model(small_arch, seed=11)
    other = build_model(small_arch, seed=12)
    for name, value in first.generator_params.items():
        np.testing.assert_array_equal(value, second.generator_params[name])
    assert not np.array_equal(first.critic_params['D/dense0/W'], other.critic_params['D/dense0/W'])
    assert list(first.generator_params) == list(generator_parameter_shapes(small_arch))
    assert list(first.critic_params) == list(critic_parameter_shapes(small_arch))
    assert not first.generator_params['G/dense0/b'].any()


def test_model_rejects_wrong_parameter_shapes(small_model):
    params = dict(small_model.generator_params)
    params['G/dense0/W'] = np.zeros((3, 3))
    with pytest.raises(ShapeError):
        GanModel(small_model.architecture, params, small_model.critic_params)


def test_stripped_model_has_no_critic(small_model):
    stripped = small_model.stripped()
    assert small_model.has_critic and not stripped.has_critic
    with pytest.raises(ConfigError, match="discriminator"):
        critic_scores(stripped, np.zeros((2, 8)))


def test_rng_streams_are_reproducible_and_distinct():
    a = RngStreams.from_seed(5)
    b = RngStreams.from_seed(5)
    assert a.lot.random() == b.lot.random()
    assert a.weights.random() != a.fake.random()


def test_generator_forward_heads(small_model):
    noise = np.random.default_rng(0).standard_normal((FORWARD_CHUNK + 44, 4))
    out = generator_forward(small_model, noise)

    assert out.shape == (FORWARD_CHUNK + 44, 8)
    assert np.all(np.abs(out[:, :2]) < 1.0)
    np.testing.assert_allclose(out[:, 2:].sum(axis=1), 1.0, rtol=1e-12)
    np.testing.assert_allclose(generator_forward(small_model, noise[:10]), out[:10], rtol=1e-12, atol=1e-15)
    assert generator_forward(small_model, np.zeros((0, 4))).shape == (0, 8)
    with pytest.raises(ShapeError):
        generator_forward(small_model, np.zeros((3, 5)))


def test_recurrent_generator_output(series_arch):
    model = build_model(series_arch, seed=0)
    out = generator_forward(model, np.random.default_rng(1).standard_normal((5, 3)))
    assert out.shape == (5, 9)
    assert np.all(np.abs(out[:, :6]) < 1.0)
    np.testing.assert_allclose(out[:, 6:].sum(axis=1), 1.0, rtol=1e-12)
    assert series_arch.series_length == 6
    assert model.generator_params['G/head/consumption/W'].shape == (4, 1)


def test_interpolate_lies_between_endpoints():
    rng = np.random.default_rng(0)
    real = np.zeros((50, 3))
    fake = np.ones((50, 3))
    x_hat = interpolate(real, fake, rng)
    assert np.all((x_hat >= 0.0) & (x_hat <= 1.0))
    # one coefficient per row
    np.testing.assert_allclose(x_hat, np.repeat(x_hat[:, :1], 3, axis=1))
    with pytest.raises(ShapeError):
        interpolate(real, fake[:, :2], rng)


def test_penalty_of_linear_critic(mixture_schema):
    arch = GanArchitecture(mixture_schema, noise_dim=4, hidden_sizes=(8,), critic_hidden_sizes=())
    model = build_model(arch, seed=0)
    rng = np.random.default_rng(0)
    real = rng.uniform(-1, 1, size=(5, 8))
    fake = rng.uniform(-1, 1, size=(5, 8))

    weights = np.zeros((8, 1))
    weights[0, 0] = 2.0
    model.critic_params['D/out/W'] = weights
    model.critic_params['D/out/b'] = np.array([[0.5]])
    assert gradient_penalty(model, real, fake, np.random.default_rng(1)) == pytest.approx(10.0, rel=1e-9)

    expected = fake[:, 0].mean() * 2.0 - real[:, 0].mean() * 2.0 + 10.0
    assert discriminator_loss(model, real, fake, np.random.default_rng(1)) == pytest.approx(expected, rel=1e-9)

    weights[0, 0] = 1.0
    model.critic_params['D/out/W'] = weights
    assert gradient_penalty(model, real, fake, np.random.default_rng(1)) == pytest.approx(0.0, abs=1e-9)


def test_constant_critic_costs_exactly_the_penalty_weight(small_model, mixture_dataset):
    model = small_model.copy()
    model.critic_params = {name: np.zeros_like(value) for name, value in model.critic_params.items()}
    rng = np.random.default_rng(8)
    real = mixture_dataset.rows[:6]
    fake = generator_forward(model, rng.standard_normal((6, 4)))

    assert discriminator_loss(model, real, fake, rng, gp_weight=10.0) == pytest.approx(10.0)
    assert gradient_penalty(model, real, fake, rng, gp_weight=10.0) == pytest.approx(10.0)
    assert generator_loss(model, rng.standard_normal((5, 4))) == 0.0

    _, _, grad = critic_objective(model, real, fake, interpolate(real, fake, rng))
    assert all(np.all(np.isfinite(value)) for value in grad.entries.values())


def test_critic_gradient_matches_finite_differences(small_model, mixture_dataset):
    rng = np.random.default_rng(4)
    x_real = mixture_dataset.rows[:2]
    x_fake = generator_forward(small_model, rng.standard_normal((2, 4)))
    x_hat = interpolate(x_real, x_fake, rng)

    _, _, grad = critic_objective(small_model, x_real, x_fake, x_hat)

    def objective(model):
        return critic_objective(model, x_real, x_fake, x_hat, with_gradient=False)[0]

    numeric = _numeric_gradient(small_model, 'critic_params', objective)
    for name, value in numeric.items():
        np.testing.assert_allclose(grad.entries[name], value, rtol=1e-4, atol=1e-7)


def test_per_example_losses_sum_to_batch_loss(small_model, mixture_dataset):
    rng = np.random.default_rng(2)
    x_real = mixture_dataset.rows[:4]
    x_fake = generator_forward(small_model, rng.standard_normal((4, 4)))
    x_hat = interpolate(x_real, x_fake, rng)

    batch_loss, batch_penalty, batch_grad = critic_objective(small_model, x_real, x_fake, x_hat)
    singles = [critic_objective(small_model, x_real[i:i + 1], x_fake[i:i + 1], x_hat[i:i + 1]) for i in range(4)]

    assert sum(s[0] for s in singles) == pytest.approx(batch_loss, rel=1e-10)
    assert sum(s[1] for s in singles) == pytest.approx(batch_penalty, rel=1e-10)
    for name, value in batch_grad.entries.items():
        np.testing.assert_allclose(sum(s[2].entries[name] for s in singles), value, rtol=1e-10, atol=1e-12)


def test_generator_gradient_matches_finite_differences(small_model):
    noise = np.random.default_rng(5).standard_normal((3, 4))
    _, grad = generator_objective(small_model, noise)

    numeric = _numeric_gradient(small_model, 'generator_params', lambda m: generator_objective(m, noise)[0])
    for name, value in numeric.items():
        np.testing.assert_allclose(grad.entries[name], value, rtol=1e-4, atol=1e-7)


def test_recurrent_generator_gradient_matches_finite_differences(series_arch):
    model = build_model(series_arch, seed=2)
    noise = np.random.default_rng(6).standard_normal((2, 3))
    _, grad = generator_objective(model, noise)

    numeric = _numeric_gradient(model, 'generator_params', lambda m: generator_objective(m, noise)[0])
    for name in ('G/lstm/Wh', 'G/lstm/b', 'G/head/consumption/W'):
        np.testing.assert_allclose(grad.entries[name], numeric[name], rtol=1e-4, atol=1e-7)


def test_sample_categories_follows_probabilities():
    rng = np.random.default_rng(9)
    probs = np.tile([0.2, 0.8], (20_000, 1))
    chosen = sample_categories(probs, rng)
    assert chosen.mean() == pytest.approx(0.8, abs=0.01)
    certain = np.tile([0.0, 1.0, 0.0], (100, 1))
    assert np.all(sample_categories(certain, rng) == 1)


def test_generate_decodes_to_schema(small_model, mixture_schema):
    table = generate(small_model, 25, np.random.default_rng(0))
    again = generate(small_model, 25, np.random.default_rng(0))

    assert list(table.columns) == mixture_schema.csv_columns
    assert len(table) == 25
    assert set(table['component']) <= set(mixture_schema.column('component').levels)
    assert table['x'].between(-1.5, 1.5).all()
    pd.testing.assert_frame_equal(table, again)
    assert len(generate(small_model, 0, np.random.default_rng(0))) == 0
    with pytest.raises(ConfigError):
        generate(small_model, -1, np.random.default_rng(0))
