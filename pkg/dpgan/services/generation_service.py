#!/usr/bin/env python3
"""
Generation service: sample synthetic rows from a checkpoint
"""

import logging
from pathlib import Path

try:
    from ..checkpoint import load_checkpoint
    from ..data import write_csv, write_schema
    from ..gan import RngStreams, generate
    from ..run_config import write_command_config
except ImportError:
    from dpgan.checkpoint import load_checkpoint
    from dpgan.data import write_csv, write_schema
    from dpgan.gan import RngStreams, generate
    from dpgan.run_config import write_command_config

# Create logger for this module
logger = logging.getLogger(__name__)


def schema_sidecar(csv_path) -> Path:
    """<out>.schema next to a generated CSV"""
    path = Path(csv_path)
    return path.with_suffix('.schema')


def run_generation(checkpoint, count: int, seed: int, out) -> Path:
    """
    Write ``count`` rows sampled from the checkpoint's generator

    The embedded schema is written beside the CSV so the output can be loaded
    back without the checkpoint. The resolved settings go to the CSV's directory.
    """
    model = load_checkpoint(checkpoint)
    rng = RngStreams.from_seed(seed).generation
    table = generate(model, count, rng)
    path = write_csv(table, out, model.schema)
    write_schema(model.schema, schema_sidecar(path))
    write_command_config(
        path.parent, 'generate',
        {'checkpoint': Path(checkpoint).resolve(), 'count': count, 'seed': seed, 'out': path.resolve()},
        checkpoint,
    )
    logger.info(f"Wrote {count} generated rows to {path}")
    return path
