#!/usr/bin/env python3
"""
Evaluation service: distance and utility reports for a checkpoint
"""

import logging
import math
from pathlib import Path
from typing import Dict, Optional, Tuple

try:
    from ..checkpoint import load_checkpoint, read_sidecar, sidecar_path
    from ..data import SERIES, balanced_split, encode, load_csv, load_schema
    from ..errors import ConfigError, DataError
    from ..forest import ForestConfig
    from ..gan import GanModel, RngStreams, generate
    from ..metrics import DEFAULT_PROJECTIONS, column_distances, nearest_dtw, sliced_wasserstein
    from ..run_config import write_command_config
    from ..utility import tstr_utility, write_report
except ImportError:
    from dpgan.checkpoint import load_checkpoint, read_sidecar, sidecar_path
    from dpgan.data import SERIES, balanced_split, encode, load_csv, load_schema
    from dpgan.errors import ConfigError, DataError
    from dpgan.forest import ForestConfig
    from dpgan.gan import GanModel, RngStreams, generate
    from dpgan.metrics import DEFAULT_PROJECTIONS, column_distances, nearest_dtw, sliced_wasserstein
    from dpgan.run_config import write_command_config
    from dpgan.utility import tstr_utility, write_report

# Create logger for this module
logger = logging.getLogger(__name__)

DISTANCE = 'distance'
UTILITY = 'utility'
REPORT_NAME = 'report.csv'
# Nearest-neighbour DTW is quadratic in series length per pair
DTW_SAMPLE = 100
UTILITY_TEST_FRACTION = 0.3


def _model_epsilon(checkpoint) -> float:
    if not sidecar_path(checkpoint).is_file():
        return math.inf
    return float(read_sidecar(checkpoint).get('epsilon', math.inf))


def _load_matching(checkpoint, schema_path) -> Tuple[GanModel, object]:
    model = load_checkpoint(checkpoint)
    schema = load_schema(schema_path)
    if schema != model.schema:
        raise DataError(
            f"Schema {schema_path} does not match the checkpoint's schema "
            f"({schema.names} vs {model.schema.names})"
        )
    return model, schema


def distance_metrics(model: GanModel, real, seed: int, n_synthetic: Optional[int] = None,
                     n_projections: int = DEFAULT_PROJECTIONS) -> Dict[str, float]:
    """Sliced W1 in encoded space, per-column marginals, nearest-series DTW"""
    schema = model.schema
    if len(real) == 0:
        raise DataError("Cannot compute distances against an empty real table")
    count = n_synthetic or len(real)
    synthetic = generate(model, count, RngStreams.from_seed(seed).generation)

    metrics = {
        'sliced_w1': sliced_wasserstein(encode(real, schema).rows, encode(synthetic, schema).rows, n_projections, seed),
    }
    metrics.update(column_distances(real, synthetic, schema))
    for column in schema.columns:
        if column.kind != SERIES:
            continue
        generated = synthetic[column.csv_names].to_numpy()[:DTW_SAMPLE]
        matches = nearest_dtw(generated, real[column.csv_names].to_numpy())
        for name, value in matches.summary().items():
            metrics[f"dtw/{column.name}/{name}"] = value
    return metrics


def run_evaluation(
    checkpoint,
    data_csv,
    schema_path,
    mode: str,
    seed: int,
    out_dir,
    run_id: str = 'eval',
    label: Optional[str] = None,
    test_csv=None,
    n_synthetic: Optional[int] = None,
) -> Tuple[Path, Dict[str, float]]:
    """
    Evaluate a checkpoint against real data and write ``report.csv``

    Args:
        mode: 'distance' or 'utility'
        label: target column for utility mode
        test_csv: held-out real rows; utility mode splits ``data_csv`` when absent
    """
    if mode not in (DISTANCE, UTILITY):
        raise ConfigError(f"mode must be '{DISTANCE}' or '{UTILITY}', got '{mode}'")
    model, schema = _load_matching(checkpoint, schema_path)
    real = load_csv(data_csv, schema)
    epsilon = _model_epsilon(checkpoint)

    if mode == DISTANCE:
        metrics = distance_metrics(model, real, seed, n_synthetic)
        metrics['epsilon'] = epsilon
    else:
        if not label:
            raise ConfigError("utility mode needs a label column (--label)")
        if test_csv is not None:
            train_rows, test_rows = real, load_csv(test_csv, schema)
        else:
            train_rows, test_rows = balanced_split(real, label, UTILITY_TEST_FRACTION, seed)
        report = tstr_utility(
            model, test_rows, ForestConfig(seed=seed), n_synthetic or len(train_rows), seed,
            schema=schema, label=label, real_train=train_rows, epsilon=epsilon,
        )
        metrics = report.metrics()

    path = write_report(Path(out_dir) / REPORT_NAME, run_id, metrics)
    settings = {
        'checkpoint': Path(checkpoint).resolve(), 'data': Path(data_csv).resolve(),
        'schema': Path(schema_path).resolve(), 'mode': mode, 'seed': seed, 'run_id': run_id,
        'label': label, 'test': Path(test_csv).resolve() if test_csv is not None else None,
        'n_synthetic': n_synthetic, 'n_projections': DEFAULT_PROJECTIONS,
    }
    write_command_config(out_dir, 'evaluate', settings, checkpoint)
    logger.info(f"Wrote {mode} report with {len(metrics)} metrics to {path}")
    return path, metrics
