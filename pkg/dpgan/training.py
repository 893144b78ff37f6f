#!/usr/bin/env python3
"""
Differentially private WGAN-GP training loop

Each generator iteration runs n_disc x b critic updates on Poisson-sampled
lots with per-example clipping and Gaussian noise, decays the clipping bound,
records n_disc x b steps in the moment accountant, then takes one Adam step
for the generator on fresh noise. The run stops before any iteration that
would push epsilon past the target, or at the iteration cap.
"""

import logging
import math
import time
from contextlib import nullcontext
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

try:
    from .accountant import MechanismParams, MomentAccountant, PrivacySpent
    from .data import EncodedDataset, check_encoding
    from .dp_optim import AdamState, DpSgdConfig, adam_step, clip, decay_clip, noisy_aggregate, sample_lot, sgd_step
    from .errors import ConfigError, DataError, NonFiniteError, NumericError, TrainingDivergedError
    from .gan import (
        GP_WEIGHT, GanArchitecture, GanModel, RngStreams, build_model, critic_objective,
        critic_parameter_shapes, generator_forward, generator_objective, interpolate,
    )
    from .settings import DEFAULT_DELTA, LAMBDA_MAX, WORKERS
except ImportError:
    from accountant import MechanismParams, MomentAccountant, PrivacySpent
    from data import EncodedDataset, check_encoding
    from dp_optim import AdamState, DpSgdConfig, adam_step, clip, decay_clip, noisy_aggregate, sample_lot, sgd_step
    from errors import ConfigError, DataError, NonFiniteError, NumericError, TrainingDivergedError
    from gan import (
        GP_WEIGHT, GanArchitecture, GanModel, RngStreams, build_model, critic_objective,
        critic_parameter_shapes, generator_forward, generator_objective, interpolate,
    )
    from settings import DEFAULT_DELTA, LAMBDA_MAX, WORKERS

# Create logger for this module
logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['iteration', 'critic_loss', 'clip_bound', 'epsilon']


@dataclass(frozen=True)
class TrainLoopConfig:
    """
    Training loop settings

    Attributes:
        dp: critic optimiser (C, sigma, L, eta, clipping decay)
        epsilon_target: privacy budget; training stops before exceeding it
        delta: delta used for the budget check
        n_disc: critic iterations per generator iteration
        batch_count: lots drawn per critic iteration (b)
        gp_weight: gradient-penalty coefficient
        max_generator_iterations: hard stop
        metrics_every: log and callback period, in generator iterations
        generator_batch: noise draws m per generator update
        generator_learning_rate: Adam step size for the generator
        private: False trains the plain WGAN-GP reference loop
        workers: threads for per-example critic gradients
    """
    dp: DpSgdConfig = field(default_factory=DpSgdConfig)
    epsilon_target: float = 8.0
    delta: float = DEFAULT_DELTA
    n_disc: int = 5
    batch_count: int = 1
    gp_weight: float = GP_WEIGHT
    max_generator_iterations: int = 1000
    metrics_every: int = 10
    generator_batch: int = 64
    generator_learning_rate: float = 1e-4
    adam_beta1: float = 0.0
    adam_beta2: float = 0.9
    private: bool = True
    workers: int = WORKERS
    lambda_max: int = LAMBDA_MAX

    def __post_init__(self):
        if not self.epsilon_target > 0:
            raise ConfigError(f"epsilon_target must be positive, got {self.epsilon_target}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if self.n_disc < 1 or self.batch_count < 1:
            raise ConfigError(f"n_disc and batch_count must be at least 1, got {self.n_disc}, {self.batch_count}")
        if self.gp_weight < 0:
            raise ConfigError(f"gp_weight must be nonnegative, got {self.gp_weight}")
        if self.max_generator_iterations < 0:
            raise ConfigError(f"max_generator_iterations must be nonnegative, got {self.max_generator_iterations}")
        if self.metrics_every < 1 or self.generator_batch < 1 or self.workers < 1:
            raise ConfigError("metrics_every, generator_batch and workers must be positive")
        if not self.generator_learning_rate > 0:
            raise ConfigError(f"generator_learning_rate must be positive, got {self.generator_learning_rate}")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ConfigError("Adam betas must be in [0, 1)")

    @property
    def accounted(self) -> bool:
        """Whether the moment accountant governs the run"""
        return self.private and self.dp.noise_scale > 0

    @property
    def steps_per_iteration(self) -> int:
        return self.n_disc * self.batch_count


@dataclass(frozen=True)
class MetricsRecord:
    iteration: int
    critic_loss: float
    clip_bound: float
    epsilon: float
    wall_clock: float = 0.0


@dataclass
class MetricsTrace:
    """Per generator iteration: critic loss, clipping bound in use, cumulative epsilon"""
    records: List[MetricsRecord] = field(default_factory=list)

    def append(self, record: MetricsRecord):
        if self.records:
            last = self.records[-1]
            if record.epsilon < last.epsilon:
                raise NumericError(f"epsilon decreased from {last.epsilon} to {record.epsilon}")
            if record.clip_bound > last.clip_bound:
                raise NumericError(f"clip bound increased from {last.clip_bound} to {record.clip_bound}")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([r.epsilon for r in self.records])

    @property
    def clip_bounds(self) -> np.ndarray:
        return np.array([r.clip_bound for r in self.records])

    @property
    def critic_losses(self) -> np.ndarray:
        return np.array([r.critic_loss for r in self.records])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.iteration, r.critic_loss, r.clip_bound, r.epsilon) for r in self.records],
            columns=TRACE_COLUMNS,
        )

    def write_csv(self, path) -> Path:
        """metrics.csv: no wall-clock, so reruns are byte-identical"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator='\n')
        return path

    def write_timings(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(
            [(r.iteration, r.wall_clock) for r in self.records], columns=['iteration', 'wall_clock']
        )
        frame.to_csv(path, index=False, lineterminator='\n')
        return path

    @classmethod
    def read_csv(cls, path) -> 'MetricsTrace':
        frame = pd.read_csv(path)
        trace = cls()
        for row in frame.itertuples(index=False):
            trace.append(MetricsRecord(int(row.iteration), float(row.critic_loss), float(row.clip_bound), float(row.epsilon)))
        return trace


ReportCallback = Callable[[GanModel, MetricsRecord], None]


@dataclass
class _LoopState:
    model: GanModel
    dp: DpSgdConfig
    adam: AdamState
    accountant: Optional[MomentAccountant]


def _critic_lot(
    model: GanModel,
    rows: np.ndarray,
    q: float,
    dp: DpSgdConfig,
    cfg: TrainLoopConfig,
    streams: RngStreams,
    parallel: Optional[Parallel],
) -> Tuple[GanModel, Optional[float]]:
    """One critic update on one lot; returns the new model and the lot's mean loss"""
    lot = sample_lot(rows.shape[0], q, streams.lot)
    size = len(lot)
    shapes = critic_parameter_shapes(model.architecture)
    arch = model.architecture

    x_real = rows[lot]
    x_fake = generator_forward(model, streams.fake.standard_normal((size, arch.noise_dim)))
    x_hat = interpolate(x_real, x_fake, streams.interpolation)

    lot_loss = None
    if cfg.private:
        def per_example(i):
            window = slice(i, i + 1)
            loss, _, grad = critic_objective(model, x_real[window], x_fake[window], x_hat[window], cfg.gp_weight)
            return loss, clip(grad, dp.clip_bound)

        if parallel is not None:
            results = parallel(delayed(per_example)(i) for i in range(size))
        else:
            results = [per_example(i) for i in range(size)]
        if results:
            lot_loss = sum(loss for loss, _ in results) / size
        update = noisy_aggregate([g for _, g in results], dp, streams.dp_noise, shapes)
    else:
        if size == 0:
            return model, None
        loss_sum, _, grad = critic_objective(model, x_real, x_fake, x_hat, cfg.gp_weight)
        lot_loss = loss_sum / size
        update = grad.scaled(1.0 / dp.lot_size)

    critic = sgd_step(model.require_critic(), update, dp.learning_rate)
    return replace(model, critic_params=critic), lot_loss


def _generator_update(state: _LoopState, cfg: TrainLoopConfig, streams: RngStreams) -> _LoopState:
    noise = streams.generator_noise.standard_normal((cfg.generator_batch, state.model.architecture.noise_dim))
    _, grad = generator_objective(state.model, noise)
    adam, params = adam_step(state.adam, state.model.generator_params, grad, cfg.generator_learning_rate)
    return replace(state, model=replace(state.model, generator_params=params), adam=adam)


def train(
    dataset: EncodedDataset,
    arch: GanArchitecture,
    cfg: TrainLoopConfig,
    seed: int,
    on_report: Optional[ReportCallback] = None,
) -> Tuple[GanModel, MetricsTrace, PrivacySpent]:
    """
    Train a generator under a privacy budget

    Args:
        dataset: encoded training rows
        arch: network shapes; must match the dataset encoding
        cfg: loop settings
        seed: root seed for every random stream
        on_report: called with (model, record) every ``metrics_every`` iterations

    Returns:
        tuple: (model, trace, privacy spent). Epsilon is infinite when the
            accountant is bypassed (sigma = 0 or the non-private loop).

    Raises:
        DataError: empty dataset, width mismatch, or rows that are not a valid encoding
        TrainingDivergedError: a loss or gradient became non-finite; carries the
            model from before the failing iteration
    """
    if dataset.n == 0:
        raise DataError("Cannot train on an empty dataset")
    if dataset.width != arch.output_width:
        raise DataError(f"Dataset width {dataset.width} does not match architecture output width {arch.output_width}")
    check_encoding(dataset)

    rows = dataset.rows
    streams = RngStreams.from_seed(seed)
    model = build_model(arch, seed)
    q = min(1.0, cfg.dp.lot_size / dataset.n)
    accountant = None
    if cfg.accounted:
        accountant = MomentAccountant(MechanismParams(q, cfg.dp.noise_scale), lambda_max=cfg.lambda_max)
    state = _LoopState(model, cfg.dp, AdamState.zeros(model.generator_params, cfg.adam_beta1, cfg.adam_beta2), accountant)

    logger.info(
        f"Training {arch.generator_kind} GAN on {dataset.n} rows: q={q:.5g}, sigma={cfg.dp.noise_scale}, "
        f"C={cfg.dp.clip_bound}, target epsilon={cfg.epsilon_target if cfg.accounted else 'inf'}"
    )

    trace = MetricsTrace()
    critic_loss = 0.0
    started = time.perf_counter()
    threaded = cfg.private and cfg.workers > 1
    with (Parallel(n_jobs=cfg.workers, prefer='threads') if threaded else nullcontext()) as parallel:
        for iteration in range(cfg.max_generator_iterations):
            if state.accountant is not None:
                projected = state.accountant.record_steps(cfg.steps_per_iteration)
                if projected.epsilon_for_delta(cfg.delta) > cfg.epsilon_target:
                    if iteration == 0:
                        logger.warning(
                            f"Budget epsilon={cfg.epsilon_target} is exhausted before the first generator update"
                        )
                    logger.info(f"Stopping at iteration {iteration}: next iteration would exceed the budget")
                    break

            last_good = state.model.copy()
            clip_in_use = state.dp.clip_bound
            try:
                losses = []
                model = state.model
                for _ in range(cfg.steps_per_iteration):
                    model, lot_loss = _critic_lot(model, rows, q, state.dp, cfg, streams, parallel)
                    if lot_loss is not None:
                        losses.append(lot_loss)
                if losses:
                    critic_loss = float(np.mean(losses))
                if not math.isfinite(critic_loss):
                    raise NonFiniteError(f"critic loss is {critic_loss}")
                state = replace(state, model=model, dp=decay_clip(state.dp))
                if state.accountant is not None:
                    state = replace(state, accountant=state.accountant.record_steps(cfg.steps_per_iteration))
                state = _generator_update(state, cfg, streams)
            except NonFiniteError as e:
                logger.error(f"Training diverged at generator iteration {iteration}: {e}", exc_info=True)
                raise TrainingDivergedError(
                    f"Non-finite value at generator iteration {iteration}: {e}",
                    last_good_model=last_good,
                    iteration=iteration,
                ) from e

            epsilon = state.accountant.epsilon_for_delta(cfg.delta) if state.accountant is not None else math.inf
            record = MetricsRecord(iteration, critic_loss, clip_in_use, epsilon, time.perf_counter() - started)
            trace.append(record)

            if (iteration + 1) % cfg.metrics_every == 0:
                logger.info(
                    f"iteration {iteration + 1}: critic loss {critic_loss:.5f}, C {clip_in_use:.4g}, epsilon {epsilon:.4f}"
                )
                if on_report is not None:
                    on_report(state.model, record)

    if state.accountant is not None:
        spent = state.accountant.privacy_spent(cfg.delta)
    else:
        spent = PrivacySpent(epsilon=math.inf, delta=cfg.delta)
    logger.info(f"Training finished after {len(trace)} generator iterations, epsilon={spent.epsilon:.4f}")
    return state.model, trace, spent
