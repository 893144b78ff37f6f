#!/usr/bin/env python3
"""
Training service: config file in, checkpoint + metrics out
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

try:
    from ..accountant import PrivacySpent
    from ..checkpoint import config_digest, save_checkpoint
    from ..data import encode, load_csv, load_schema
    from ..errors import TrainingDivergedError
    from ..run_config import RunConfig, load_run_config
    from ..training import MetricsTrace, train
except ImportError:
    from dpgan.accountant import PrivacySpent
    from dpgan.checkpoint import config_digest, save_checkpoint
    from dpgan.data import encode, load_csv, load_schema
    from dpgan.errors import TrainingDivergedError
    from dpgan.run_config import RunConfig, load_run_config
    from dpgan.training import MetricsTrace, train

# Create logger for this module
logger = logging.getLogger(__name__)

CHECKPOINT_NAME = 'model.ckpt'
LAST_GOOD_NAME = 'last_good.ckpt'
METRICS_NAME = 'metrics.csv'
TIMINGS_NAME = 'timings.csv'


@dataclass
class TrainingOutcome:
    output_dir: Path
    checkpoint: Path
    metrics: Path
    trace: MetricsTrace
    spent: PrivacySpent


def resolve_config(config_path, seed: Optional[int] = None, out: Optional[str] = None) -> RunConfig:
    """Load a run config and apply command-line overrides"""
    config = load_run_config(config_path)
    if seed is not None:
        config = config.with_overrides('run', seed=int(seed))
    if out is not None:
        config = config.with_overrides('run', output_dir=str(out))
    return config


def run_training(config: RunConfig, strip_discriminator: bool = False) -> TrainingOutcome:
    """
    Train per ``config`` and write the run directory

    Writes resolved_config.ini first, then model.ckpt (+ .meta.json),
    metrics.csv and timings.csv. On divergence the last good model is saved as
    last_good.ckpt before the error propagates.
    """
    output_dir = config.output_dir
    resolved = config.write_resolved(output_dir)
    digest = config_digest(resolved.read_text(encoding='utf-8'))
    logger.info(f"Run '{config.run_id}' writing to {output_dir}")

    schema = load_schema(config.schema_path)
    table = load_csv(config.train_csv, schema)
    dataset = encode(table, schema)
    arch = config.architecture(schema)
    cfg = config.train_loop_config()

    try:
        model, trace, spent = train(dataset, arch, cfg, config.seed)
    except TrainingDivergedError as e:
        if e.last_good_model is not None:
            path = save_checkpoint(
                e.last_good_model,
                output_dir / LAST_GOOD_NAME,
                strip_discriminator=strip_discriminator,
                metadata={'seed': config.seed, 'config_digest': digest, 'diverged_at': e.iteration},
            )
            logger.error(f"Saved last good model to {path}")
        raise

    metadata = {
        'run_id': config.run_id,
        'seed': config.seed,
        'config_digest': digest,
        'epsilon': spent.epsilon,
        'delta': spent.delta,
        'best_lambda': spent.best_lambda,
        'generator_iterations': len(trace),
        'has_discriminator': not strip_discriminator,
    }
    checkpoint = save_checkpoint(model, output_dir / CHECKPOINT_NAME, strip_discriminator, metadata)
    metrics = trace.write_csv(output_dir / METRICS_NAME)
    trace.write_timings(output_dir / TIMINGS_NAME)
    return TrainingOutcome(output_dir, checkpoint, metrics, trace, spent)
