#!/usr/bin/env python3
"""
Differentially private gradient machinery

Per-example clipping, noisy aggregation over a Poisson-sampled lot, clipping
decay, and the plain SGD / Adam parameter updates used by the training loop.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

try:
    from .autodiff import GradientVector, Shape
    from .errors import ConfigError, NonFiniteError, ShapeError
except ImportError:
    from autodiff import GradientVector, Shape
    from errors import ConfigError, NonFiniteError, ShapeError

# Create logger for this module
logger = logging.getLogger(__name__)

Params = Dict[str, np.ndarray]


@dataclass(frozen=True)
class DpSgdConfig:
    """
    Discriminator optimiser settings

    Attributes:
        clip_bound: per-example L2 clipping bound C
        noise_scale: sigma; the added noise has std sigma * C
        lot_size: expected lot size L, also the fixed aggregation divisor
        learning_rate: eta for the discriminator descent step
        clip_decay: factor applied to C once per generator iteration; 1 disables decay
        decay_floor: smallest C decay may reach; defaults to 1e-3 * initial C
    """
    clip_bound: float = 1.0
    noise_scale: float = 1.0
    lot_size: int = 64
    learning_rate: float = 0.05
    clip_decay: float = 1.0
    decay_floor: Optional[float] = None

    def __post_init__(self):
        if not self.clip_bound > 0:
            raise ConfigError(f"clip_bound must be positive, got {self.clip_bound}")
        if self.noise_scale < 0:
            raise ConfigError(f"noise_scale must be nonnegative, got {self.noise_scale}")
        if self.lot_size < 1:
            raise ConfigError(f"lot_size must be positive, got {self.lot_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 < self.clip_decay <= 1:
            raise ConfigError(f"clip_decay must be in (0, 1], got {self.clip_decay}")
        if self.decay_floor is None:
            object.__setattr__(self, 'decay_floor', 1e-3 * self.clip_bound)
        elif not self.decay_floor > 0:
            raise ConfigError(f"decay_floor must be positive, got {self.decay_floor}")


@dataclass
class AdamState:
    """Adam moments for one parameter set"""
    first_moment: Params
    second_moment: Params
    step: int = 0
    beta1: float = 0.0
    beta2: float = 0.9
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, params: Mapping[str, np.ndarray], beta1=0.0, beta2=0.9, epsilon=1e-8) -> 'AdamState':
        return cls(
            first_moment={k: np.zeros_like(v) for k, v in params.items()},
            second_moment={k: np.zeros_like(v) for k, v in params.items()},
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )

    def copy(self) -> 'AdamState':
        return replace(
            self,
            first_moment={k: v.copy() for k, v in self.first_moment.items()},
            second_moment={k: v.copy() for k, v in self.second_moment.items()},
        )


def _check_shapes(expected: Mapping[str, Shape], actual: Mapping[str, Shape], what: str):
    if dict(expected) != dict(actual):
        raise ShapeError(f"{what}: parameter shapes {dict(actual)} do not match {dict(expected)}")


def clip(g: GradientVector, clip_bound: float) -> GradientVector:
    """
    Scale a per-example gradient to L2 norm at most ``clip_bound``

    Gradients already inside the bound are returned unchanged.
    """
    if not clip_bound > 0:
        raise ConfigError(f"clip_bound must be positive, got {clip_bound}")
    if not g.is_finite():
        raise NonFiniteError("Cannot clip a non-finite gradient")
    factor = max(1.0, g.norm / clip_bound)
    if factor == 1.0:
        return g
    return g.scaled(1.0 / factor)


def noisy_aggregate(
    grads: Sequence[GradientVector],
    cfg: DpSgdConfig,
    rng: np.random.Generator,
    shapes: Optional[Mapping[str, Shape]] = None,
) -> GradientVector:
    """
    (sum of clipped gradients + N(0, (sigma C)^2 I)) / L

    Gradients are summed in list order. One Gaussian draw per coordinate is
    added once per lot. With sigma = 0 no random numbers are consumed.

    Args:
        grads: clipped per-example gradients, possibly empty
        cfg: supplies C, sigma and the fixed divisor L
        rng: noise source
        shapes: parameter shapes, required when ``grads`` is empty
    """
    if shapes is None:
        if not grads:
            raise ShapeError("noisy_aggregate needs parameter shapes for an empty lot")
        shapes = grads[0].shapes()
    total = {k: np.zeros(s) for k, s in shapes.items()}
    for g in grads:
        _check_shapes(shapes, g.shapes(), "noisy_aggregate")
        for k, value in g.entries.items():
            total[k] += value
    if cfg.noise_scale > 0:
        std = cfg.noise_scale * cfg.clip_bound
        for k in total:
            total[k] += rng.normal(0.0, std, size=shapes[k])
    return GradientVector({k: v / cfg.lot_size for k, v in total.items()})


def decay_clip(cfg: DpSgdConfig) -> DpSgdConfig:
    """C <- max(decay_floor, C * clip_decay); nothing else changes"""
    if cfg.clip_decay == 1.0:
        return cfg
    return replace(cfg, clip_bound=max(cfg.decay_floor, cfg.clip_bound * cfg.clip_decay))


def sgd_step(params: Mapping[str, np.ndarray], g: GradientVector, learning_rate: float) -> Params:
    """theta <- theta - eta g"""
    _check_shapes({k: v.shape for k, v in params.items()}, g.shapes(), "sgd_step")
    return {k: v - learning_rate * g.entries[k] for k, v in params.items()}


def adam_step(state: AdamState, params: Mapping[str, np.ndarray], g: GradientVector, learning_rate: float):
    """
    One bias-corrected Adam update

    Returns:
        tuple: (new_state, new_params)
    """
    shapes = {k: v.shape for k, v in params.items()}
    _check_shapes(shapes, g.shapes(), "adam_step")
    _check_shapes(shapes, {k: v.shape for k, v in state.first_moment.items()}, "adam_step state")

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    first, second, updated = {}, {}, {}
    for k, value in params.items():
        grad = g.entries[k]
        first[k] = b1 * state.first_moment[k] + (1.0 - b1) * grad
        second[k] = b2 * state.second_moment[k] + (1.0 - b2) * grad * grad
        m_hat = first[k] / (1.0 - b1 ** step)
        v_hat = second[k] / (1.0 - b2 ** step)
        updated[k] = value - learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = replace(state, first_moment=first, second_moment=second, step=step)
    return new_state, updated


def sample_lot(n_records: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """Poisson sampling: each record joins the lot independently with probability q"""
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"Sampling probability q must be in [0, 1], got {q}")
    if q == 1.0:
        return np.arange(n_records)
    return np.flatnonzero(rng.random(n_records) < q)
