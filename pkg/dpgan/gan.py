#!/usr/bin/env python3
"""
Generator and critic networks, WGAN losses and sample generation

Both networks are expressed as ComputeGraph instances built once per
(architecture, batch size) and cached. Parameters are graph leaves fed by
name, so a GanModel is just the architecture plus two name -> array maps.

Parameter names:
    G/dense{i}/W, G/dense{i}/b       MLP generator hidden layers
    G/lstm/Wx, G/lstm/Wh, G/lstm/b   recurrent generator cell
    G/head/{column}/W, .../b         one output head per schema column
    D/dense{i}/W, D/dense{i}/b       critic hidden layers
    D/out/W, D/out/b                 critic output unit
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

try:
    from .autodiff import ComputeGraph, GradientVector, Shape
    from .data import CATEGORICAL, SERIES, Schema, decode_rows
    from .errors import ConfigError, SchemaError, ShapeError
except ImportError:
    from autodiff import ComputeGraph, GradientVector, Shape
    from data import CATEGORICAL, SERIES, Schema, decode_rows
    from errors import ConfigError, SchemaError, ShapeError

# Create logger for this module
logger = logging.getLogger(__name__)

MLP = 'mlp'
RECURRENT = 'recurrent'
SOFTMAX = 'softmax'
TANH = 'tanh'

GP_WEIGHT = 10.0
# Keeps the penalty's norm differentiable at a zero input gradient
GP_NORM_EPS = 1e-30
FORWARD_CHUNK = 256

STREAM_NAMES = ('weights', 'lot', 'dp_noise', 'generator_noise', 'fake', 'interpolation', 'generation')

Params = Dict[str, np.ndarray]


@dataclass(frozen=True)
class HeadSpec:
    """Output head for one schema column: a softmax group or tanh units"""
    name: str
    kind: str
    width: int


def heads_for_schema(schema: Schema) -> Tuple[HeadSpec, ...]:
    return tuple(
        HeadSpec(c.name, SOFTMAX if c.kind == CATEGORICAL else TANH, c.width)
        for c in schema.columns
    )


@dataclass(frozen=True)
class GanArchitecture:
    """
    Network shapes for one schema

    Attributes:
        schema: column layout the generator must reproduce
        heads: one head per schema column, in schema order (derived when empty)
        generator_kind: 'mlp' or 'recurrent'
        noise_dim: latent size m
        hidden_sizes: MLP generator hidden widths
        critic_hidden_sizes: critic hidden widths; empty gives a linear critic
        lstm_hidden: recurrent generator state size
        activation: hidden nonlinearity, 'relu' or 'tanh'
    """
    schema: Schema
    heads: Tuple[HeadSpec, ...] = ()
    generator_kind: str = MLP
    noise_dim: int = 64
    hidden_sizes: Tuple[int, ...] = (128, 128)
    critic_hidden_sizes: Tuple[int, ...] = (128, 128)
    lstm_hidden: int = 64
    activation: str = 'relu'

    def __post_init__(self):
        object.__setattr__(self, 'hidden_sizes', tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, 'critic_hidden_sizes', tuple(int(h) for h in self.critic_hidden_sizes))
        if not self.heads:
            object.__setattr__(self, 'heads', heads_for_schema(self.schema))
        else:
            object.__setattr__(self, 'heads', tuple(self.heads))

        if self.generator_kind not in (MLP, RECURRENT):
            raise ConfigError(f"generator_kind must be '{MLP}' or '{RECURRENT}', got '{self.generator_kind}'")
        if self.activation not in ('relu', 'tanh'):
            raise ConfigError(f"activation must be 'relu' or 'tanh', got '{self.activation}'")
        if self.noise_dim < 1 or self.lstm_hidden < 1:
            raise ConfigError("noise_dim and lstm_hidden must be positive")
        if any(h < 1 for h in self.hidden_sizes + self.critic_hidden_sizes):
            raise ConfigError("hidden layer sizes must be positive")

        self._check_heads()
        if self.generator_kind == RECURRENT:
            series = [c for c in self.schema.columns if c.kind == SERIES]
            if len(series) != 1:
                raise ConfigError(
                    f"A recurrent generator needs exactly one series column; schema has {len(series)}"
                )

    def _check_heads(self):
        columns = self.schema.columns
        if [h.name for h in self.heads] != [c.name for c in columns]:
            raise SchemaError(
                f"Head layout {[h.name for h in self.heads]} does not follow schema columns {self.schema.names}"
            )
        for head, column in zip(self.heads, columns):
            expected = SOFTMAX if column.kind == CATEGORICAL else TANH
            if head.kind != expected or head.width != column.width:
                raise SchemaError(
                    f"Head '{head.name}' is {head.kind}[{head.width}], column needs {expected}[{column.width}]"
                )
        if sum(h.width for h in self.heads) != self.schema.width:
            raise SchemaError("Head widths do not sum to the encoded row width")

    @property
    def output_width(self) -> int:
        return sum(h.width for h in self.heads)

    @property
    def series_length(self) -> Optional[int]:
        if self.generator_kind != RECURRENT:
            return None
        return next(c.length for c in self.schema.columns if c.kind == SERIES)

    @property
    def softmax_groups(self) -> List[Tuple[int, int]]:
        """(start, stop) of every softmax head in the output row"""
        spans = self.schema.width_map
        return [spans[h.name] for h in self.heads if h.kind == SOFTMAX]

    def to_dict(self) -> dict:
        return {
            'schema': self.schema.to_lines(),
            'generator_kind': self.generator_kind,
            'noise_dim': self.noise_dim,
            'hidden_sizes': list(self.hidden_sizes),
            'critic_hidden_sizes': list(self.critic_hidden_sizes),
            'lstm_hidden': self.lstm_hidden,
            'activation': self.activation,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> 'GanArchitecture':
        values = dict(data)
        schema = Schema.from_lines(values.pop('schema'), source='<checkpoint schema>')
        return cls(schema=schema, **values)


@dataclass
class RngStreams:
    """Independent generators derived from one root seed, one per subsystem"""
    weights: np.random.Generator
    lot: np.random.Generator
    dp_noise: np.random.Generator
    generator_noise: np.random.Generator
    fake: np.random.Generator
    interpolation: np.random.Generator
    generation: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> 'RngStreams':
        children = np.random.SeedSequence(int(seed)).spawn(len(STREAM_NAMES))
        return cls(*(np.random.default_rng(child) for child in children))


def generator_parameter_shapes(arch: GanArchitecture) -> Dict[str, Shape]:
    shapes: Dict[str, Shape] = {}
    if arch.generator_kind == MLP:
        fan_in = arch.noise_dim
        for i, width in enumerate(arch.hidden_sizes):
            shapes[f"G/dense{i}/W"] = (fan_in, width)
            shapes[f"G/dense{i}/b"] = (1, width)
            fan_in = width
        for head in arch.heads:
            shapes[f"G/head/{head.name}/W"] = (fan_in, head.width)
            shapes[f"G/head/{head.name}/b"] = (1, head.width)
        return shapes

    hidden = arch.lstm_hidden
    shapes['G/lstm/Wx'] = (arch.noise_dim, 4 * hidden)
    shapes['G/lstm/Wh'] = (hidden, 4 * hidden)
    shapes['G/lstm/b'] = (1, 4 * hidden)
    for head, column in zip(arch.heads, arch.schema.columns):
        # The series head is shared across steps and emits one value per step
        width = 1 if column.kind == SERIES else head.width
        shapes[f"G/head/{head.name}/W"] = (hidden, width)
        shapes[f"G/head/{head.name}/b"] = (1, width)
    return shapes


def critic_parameter_shapes(arch: GanArchitecture) -> Dict[str, Shape]:
    shapes: Dict[str, Shape] = {}
    fan_in = arch.output_width
    for i, width in enumerate(arch.critic_hidden_sizes):
        shapes[f"D/dense{i}/W"] = (fan_in, width)
        shapes[f"D/dense{i}/b"] = (1, width)
        fan_in = width
    shapes['D/out/W'] = (fan_in, 1)
    shapes['D/out/b'] = (1, 1)
    return shapes


def _init_params(shapes: Mapping[str, Shape], rng: np.random.Generator) -> Params:
    """Glorot-uniform weights, zero biases, drawn in declaration order"""
    params = {}
    for name, shape in shapes.items():
        if name.endswith('/b'):
            params[name] = np.zeros(shape)
        else:
            limit = math.sqrt(6.0 / (shape[0] + shape[1]))
            params[name] = rng.uniform(-limit, limit, size=shape)
    return params


@dataclass
class GanModel:
    """Generator and (optionally) critic parameters for one architecture"""
    architecture: GanArchitecture
    generator_params: Params
    critic_params: Optional[Params] = None
    seed: int = 0

    def __post_init__(self):
        _check_params(generator_parameter_shapes(self.architecture), self.generator_params, 'generator')
        if self.critic_params is not None:
            _check_params(critic_parameter_shapes(self.architecture), self.critic_params, 'critic')

    @property
    def schema(self) -> Schema:
        return self.architecture.schema

    @property
    def has_critic(self) -> bool:
        return self.critic_params is not None

    def require_critic(self) -> Params:
        if self.critic_params is None:
            raise ConfigError("Model has no discriminator parameters (stripped release checkpoint)")
        return self.critic_params

    def copy(self) -> 'GanModel':
        critic = None if self.critic_params is None else {k: v.copy() for k, v in self.critic_params.items()}
        return replace(
            self,
            generator_params={k: v.copy() for k, v in self.generator_params.items()},
            critic_params=critic,
        )

    def stripped(self) -> 'GanModel':
        return replace(self, critic_params=None)


def _check_params(expected: Mapping[str, Shape], params: Mapping[str, np.ndarray], what: str):
    actual = {k: tuple(np.shape(v)) for k, v in params.items()}
    if list(actual) != list(expected) or any(actual[k] != tuple(s) for k, s in expected.items()):
        raise ShapeError(f"{what} parameters {actual} do not match architecture shapes {dict(expected)}")


def build_model(arch: GanArchitecture, seed: int) -> GanModel:
    """
    Fresh model with Glorot-uniform weights from the seed's weight stream

    Generator parameters are drawn before critic parameters.
    """
    rng = RngStreams.from_seed(seed).weights
    generator = _init_params(generator_parameter_shapes(arch), rng)
    critic = _init_params(critic_parameter_shapes(arch), rng)
    logger.debug(
        f"Built {arch.generator_kind} model: {sum(v.size for v in generator.values())} generator / "
        f"{sum(v.size for v in critic.values())} critic parameters"
    )
    return GanModel(arch, generator, critic, seed=int(seed))


# ----------------------------------------------------------------------
# Graph construction
# ----------------------------------------------------------------------

def _declare(graph: ComputeGraph, shapes: Mapping[str, Shape]) -> Dict[str, int]:
    return {name: graph.parameter(name, shape) for name, shape in shapes.items()}


def _dense(graph: ComputeGraph, params: Mapping[str, int], prefix: str, x: int) -> int:
    return graph.add(graph.matmul(x, params[f"{prefix}/W"]), params[f"{prefix}/b"])


def _activate(graph: ComputeGraph, x: int, activation: str) -> int:
    return graph.relu(x) if activation == 'relu' else graph.tanh(x)


def _head(graph: ComputeGraph, head: HeadSpec, logits: int) -> int:
    return graph.softmax(logits, axis=-1) if head.kind == SOFTMAX else graph.tanh(logits)


def _mlp_generator(graph, arch, params, noise) -> int:
    hidden = noise
    for i in range(len(arch.hidden_sizes)):
        hidden = _activate(graph, _dense(graph, params, f"G/dense{i}", hidden), arch.activation)
    outputs = [_head(graph, head, _dense(graph, params, f"G/head/{head.name}", hidden)) for head in arch.heads]
    return outputs[0] if len(outputs) == 1 else graph.concat(outputs, axis=1)


def _recurrent_generator(graph, arch, params, noise) -> int:
    """
    Single-layer LSTM fed the same noise vector at every step

    The series column gets one tanh output per step; every other column is a
    dense head on the final hidden state. The state starts at zero, so the
    first step has no recurrent term.
    """
    size = arch.lstm_hidden
    series_column = next(c for c in arch.schema.columns if c.kind == SERIES)
    series_prefix = f"G/head/{series_column.name}"
    projected = graph.add(graph.matmul(noise, params['G/lstm/Wx']), params['G/lstm/b'])

    hidden = cell = None
    steps = []
    for _ in range(series_column.length):
        gates = projected if hidden is None else graph.add(projected, graph.matmul(hidden, params['G/lstm/Wh']))
        input_gate = graph.sigmoid(graph.slice(gates, 1, 0, size))
        forget_gate = graph.sigmoid(graph.slice(gates, 1, size, 2 * size))
        output_gate = graph.sigmoid(graph.slice(gates, 1, 2 * size, 3 * size))
        candidate = graph.tanh(graph.slice(gates, 1, 3 * size, 4 * size))
        update = graph.multiply(input_gate, candidate)
        cell = update if cell is None else graph.add(graph.multiply(forget_gate, cell), update)
        hidden = graph.multiply(output_gate, graph.tanh(cell))
        steps.append(graph.tanh(_dense(graph, params, series_prefix, hidden)))

    outputs = []
    for head in arch.heads:
        if head.name == series_column.name:
            outputs.append(steps[0] if len(steps) == 1 else graph.concat(steps, axis=1))
        else:
            outputs.append(_head(graph, head, _dense(graph, params, f"G/head/{head.name}", hidden)))
    return outputs[0] if len(outputs) == 1 else graph.concat(outputs, axis=1)


def _generator(graph, arch, params, noise) -> int:
    if arch.generator_kind == RECURRENT:
        return _recurrent_generator(graph, arch, params, noise)
    return _mlp_generator(graph, arch, params, noise)


def _critic(graph, arch, params, x) -> int:
    hidden = x
    for i in range(len(arch.critic_hidden_sizes)):
        hidden = _activate(graph, _dense(graph, params, f"D/dense{i}", hidden), arch.activation)
    return _dense(graph, params, 'D/out', hidden)


@dataclass
class GeneratorGraph:
    graph: ComputeGraph
    noise: int
    output: int


@dataclass
class GeneratorLossGraph:
    graph: ComputeGraph
    noise: int
    loss: int
    grads: Dict[str, int]


@dataclass
class CriticGraph:
    """Critic objective on a batch of (real, fake, interpolated) rows

    ``loss_sum`` is the sum over rows of D(fake) - D(real) + w (||grad D(x_hat)|| - 1)^2,
    so a batch of one row gives the per-example loss.
    """
    graph: ComputeGraph
    batch: int
    x_real: int
    x_fake: int
    x_hat: int
    loss_sum: int
    penalty_sum: int
    grads: Dict[str, int] = field(default_factory=dict)


@dataclass
class ScoreGraph:
    graph: ComputeGraph
    x: int
    score: int


@lru_cache(maxsize=32)
def generator_graph(arch: GanArchitecture, batch: int) -> GeneratorGraph:
    graph = ComputeGraph()
    noise = graph.input('noise', (batch, arch.noise_dim))
    params = _declare(graph, generator_parameter_shapes(arch))
    return GeneratorGraph(graph, noise, _generator(graph, arch, params, noise))


@lru_cache(maxsize=32)
def generator_loss_graph(arch: GanArchitecture, batch: int) -> GeneratorLossGraph:
    graph = ComputeGraph()
    noise = graph.input('noise', (batch, arch.noise_dim))
    g_params = _declare(graph, generator_parameter_shapes(arch))
    d_params = _declare(graph, critic_parameter_shapes(arch))
    scores = _critic(graph, arch, d_params, _generator(graph, arch, g_params, noise))
    loss = graph.scale(graph.mean(scores), -1.0)
    names = list(g_params)
    grads = dict(zip(names, graph.backward(loss, [g_params[n] for n in names])))
    return GeneratorLossGraph(graph, noise, loss, grads)


@lru_cache(maxsize=128)
def critic_graph(arch: GanArchitecture, batch: int, gp_weight: float) -> CriticGraph:
    graph = ComputeGraph()
    width = arch.output_width
    x_real = graph.input('x_real', (batch, width))
    x_fake = graph.input('x_fake', (batch, width))
    x_hat = graph.input('x_hat', (batch, width))
    params = _declare(graph, critic_parameter_shapes(arch))

    real_scores = _critic(graph, arch, params, x_real)
    fake_scores = _critic(graph, arch, params, x_fake)
    hat_scores = _critic(graph, arch, params, x_hat)

    # Rows are independent, so d(sum D(x_hat))/d x_hat gives every row's input gradient
    (input_grad,) = graph.backward(graph.sum(hat_scores), [x_hat])
    squared = graph.sum(graph.square(input_grad), axis=1, keepdims=True)
    norms = graph.sqrt(graph.add(squared, graph.constant(GP_NORM_EPS)))
    gaps = graph.subtract(norms, graph.constant(1.0))
    penalty_sum = graph.scale(graph.sum(graph.square(gaps)), gp_weight)
    loss_sum = graph.add(graph.subtract(graph.sum(fake_scores), graph.sum(real_scores)), penalty_sum)

    names = list(params)
    grads = dict(zip(names, graph.backward(loss_sum, [params[n] for n in names])))
    return CriticGraph(graph, batch, x_real, x_fake, x_hat, loss_sum, penalty_sum, grads)


@lru_cache(maxsize=32)
def score_graph(arch: GanArchitecture, batch: int) -> ScoreGraph:
    graph = ComputeGraph()
    x = graph.input('x', (batch, arch.output_width))
    params = _declare(graph, critic_parameter_shapes(arch))
    return ScoreGraph(graph, x, _critic(graph, arch, params, x))


def _chunked(rows: np.ndarray, run: Callable[[np.ndarray], np.ndarray], chunk: int = FORWARD_CHUNK) -> List[np.ndarray]:
    """Apply a fixed-batch function to rows, zero-padding the final chunk"""
    results = []
    for start in range(0, rows.shape[0], chunk):
        block = rows[start:start + chunk]
        size = block.shape[0]
        if size < chunk:
            block = np.concatenate([block, np.zeros((chunk - size,) + block.shape[1:])], axis=0)
        results.append(run(block)[:size])
    return results


# ----------------------------------------------------------------------
# Public operations
# ----------------------------------------------------------------------

def generator_forward(model: GanModel, noise_batch: np.ndarray) -> np.ndarray:
    """
    Encoded generator output for each noise row

    Softmax heads give probability vectors; tanh heads give values in (-1, 1).
    """
    arch = model.architecture
    noise_batch = np.asarray(noise_batch, dtype=np.float64)
    if noise_batch.ndim != 2 or noise_batch.shape[1] != arch.noise_dim:
        raise ShapeError(f"Noise batch has shape {noise_batch.shape}, expected (batch, {arch.noise_dim})")
    if noise_batch.shape[0] == 0:
        return np.zeros((0, arch.output_width))
    chunk = min(FORWARD_CHUNK, noise_batch.shape[0])
    bundle = generator_graph(arch, chunk)

    def run(block):
        feeds = dict(model.generator_params)
        feeds['noise'] = block
        return bundle.graph.forward(feeds, [bundle.output])[0]

    return np.concatenate(_chunked(noise_batch, run, chunk), axis=0)


def critic_scores(model: GanModel, rows: np.ndarray) -> np.ndarray:
    """Critic output per encoded row"""
    arch = model.architecture
    critic = model.require_critic()
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != arch.output_width:
        raise ShapeError(f"Rows have shape {rows.shape}, expected (n, {arch.output_width})")
    if rows.shape[0] == 0:
        return np.zeros(0)
    chunk = min(FORWARD_CHUNK, rows.shape[0])
    bundle = score_graph(arch, chunk)

    def run(block):
        feeds = dict(critic)
        feeds['x'] = block
        return bundle.graph.forward(feeds, [bundle.score])[0]

    return np.concatenate(_chunked(rows, run, chunk), axis=0).reshape(-1)


def interpolate(x_real: np.ndarray, x_fake: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """x_hat = u x_real + (1 - u) x_fake with one uniform u per row"""
    if x_real.shape != x_fake.shape:
        raise ShapeError(f"Real batch {x_real.shape} and fake batch {x_fake.shape} differ")
    u = rng.random((x_real.shape[0], 1))
    return u * x_real + (1.0 - u) * x_fake


def _critic_feeds(model: GanModel, x_real, x_fake, x_hat) -> Dict[str, np.ndarray]:
    feeds = dict(model.require_critic())
    feeds.update({'x_real': x_real, 'x_fake': x_fake, 'x_hat': x_hat})
    return feeds


def critic_objective(
    model: GanModel,
    x_real: np.ndarray,
    x_fake: np.ndarray,
    x_hat: np.ndarray,
    gp_weight: float = GP_WEIGHT,
    with_gradient: bool = True,
):
    """
    Summed critic loss over the batch and, optionally, its gradient in theta_D

    Returns:
        tuple: (loss_sum, penalty_sum, GradientVector or None)
    """
    bundle = critic_graph(model.architecture, x_real.shape[0], float(gp_weight))
    feeds = _critic_feeds(model, x_real, x_fake, x_hat)
    names = list(bundle.grads)
    outputs = [bundle.loss_sum, bundle.penalty_sum]
    if with_gradient:
        outputs += [bundle.grads[n] for n in names]
    values = bundle.graph.forward(feeds, outputs)
    grad = GradientVector(dict(zip(names, values[2:]))) if with_gradient else None
    return float(values[0][0]), float(values[1][0]), grad


def gradient_penalty(
    model: GanModel,
    x_real: np.ndarray,
    x_fake: np.ndarray,
    rng: np.random.Generator,
    gp_weight: float = GP_WEIGHT,
) -> float:
    """Mean over rows of gp_weight (||grad_x D(x_hat)|| - 1)^2 at random interpolates"""
    x_real = np.asarray(x_real, dtype=np.float64)
    x_fake = np.asarray(x_fake, dtype=np.float64)
    x_hat = interpolate(x_real, x_fake, rng)
    _, penalty_sum, _ = critic_objective(model, x_real, x_fake, x_hat, gp_weight, with_gradient=False)
    return penalty_sum / x_real.shape[0]


def discriminator_loss(
    model: GanModel,
    x_real: np.ndarray,
    x_fake: np.ndarray,
    rng: np.random.Generator,
    gp_weight: float = GP_WEIGHT,
) -> float:
    """mean D(fake) - mean D(real) + gradient penalty"""
    x_real = np.asarray(x_real, dtype=np.float64)
    x_fake = np.asarray(x_fake, dtype=np.float64)
    x_hat = interpolate(x_real, x_fake, rng)
    loss_sum, _, _ = critic_objective(model, x_real, x_fake, x_hat, gp_weight, with_gradient=False)
    return loss_sum / x_real.shape[0]


def generator_objective(model: GanModel, noise: np.ndarray) -> Tuple[float, GradientVector]:
    """Generator loss -mean D(G(z)) and its gradient in theta_G; reads no data rows"""
    noise = np.asarray(noise, dtype=np.float64)
    arch = model.architecture
    if noise.ndim != 2 or noise.shape[1] != arch.noise_dim or noise.shape[0] == 0:
        raise ShapeError(f"Noise batch has shape {noise.shape}, expected (m, {arch.noise_dim}) with m >= 1")
    bundle = generator_loss_graph(arch, noise.shape[0])
    feeds = dict(model.generator_params)
    feeds.update(model.require_critic())
    feeds['noise'] = noise
    names = list(bundle.grads)
    values = bundle.graph.forward(feeds, [bundle.loss] + [bundle.grads[n] for n in names])
    return float(values[0][0]), GradientVector(dict(zip(names, values[1:])))


def generator_loss(model: GanModel, noise: np.ndarray) -> float:
    return generator_objective(model, noise)[0]


def sample_categories(probabilities: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one level index per row from each row's probability vector"""
    cumulative = np.cumsum(probabilities, axis=1)
    u = rng.random((probabilities.shape[0], 1)) * cumulative[:, -1:]
    index = np.sum(cumulative <= u, axis=1)
    return np.minimum(index, probabilities.shape[1] - 1)


def sample_rows(model: GanModel, encoded: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Replace each softmax group with a one-hot draw from it"""
    rows = np.array(encoded, dtype=np.float64)
    for start, stop in model.architecture.softmax_groups:
        chosen = sample_categories(rows[:, start:stop], rng)
        block = np.zeros((rows.shape[0], stop - start))
        block[np.arange(rows.shape[0]), chosen] = 1.0
        rows[:, start:stop] = block
    return rows


def generate(model: GanModel, count: int, rng: np.random.Generator) -> pd.DataFrame:
    """
    Draw ``count`` synthetic rows

    Noise is drawn first, then one uniform per row for each categorical head.
    Continuous outputs are mapped back to their schema range.
    """
    if count < 0:
        raise ConfigError(f"count must be nonnegative, got {count}")
    noise = rng.standard_normal((count, model.architecture.noise_dim))
    encoded = generator_forward(model, noise)
    return decode_rows(sample_rows(model, encoded, rng), model.schema)
