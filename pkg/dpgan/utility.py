#!/usr/bin/env python3
"""
Train-on-synthetic, test-on-real utility and long-format metric reports
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Union

import numpy as np
import pandas as pd

try:
    from .data import Schema
    from .errors import DegenerateOutputError
    from .forest import ForestConfig, classify, random_forest_train
    from .gan import GanModel, generate
except ImportError:
    from data import Schema
    from errors import DegenerateOutputError
    from forest import ForestConfig, classify, random_forest_train
    from gan import GanModel, generate

# Create logger for this module
logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['run_id', 'metric', 'value']

SyntheticSource = Callable[[int, np.random.Generator], pd.DataFrame]


@dataclass(frozen=True)
class UtilityReport:
    tstr_accuracy: float
    baseline_accuracy: float
    epsilon: float = math.inf
    n_synthetic: int = 0

    def metrics(self) -> dict:
        return {
            'tstr_accuracy': self.tstr_accuracy,
            'baseline_accuracy': self.baseline_accuracy,
            'epsilon': self.epsilon,
            'n_synthetic': float(self.n_synthetic),
        }


def _as_source(generator: Union[GanModel, SyntheticSource]) -> SyntheticSource:
    if isinstance(generator, GanModel):
        return lambda count, rng: generate(generator, count, rng)
    return generator


def tstr_utility(
    generator: Union[GanModel, SyntheticSource],
    real_test: pd.DataFrame,
    classifier_cfg: ForestConfig,
    n_synthetic: int,
    seed: int,
    *,
    schema: Schema,
    label: str,
    real_train: Optional[pd.DataFrame] = None,
    epsilon: float = math.inf,
) -> UtilityReport:
    """
    Fit a forest on generated rows and score it on held-out real rows

    Args:
        generator: trained model, or any callable (count, rng) -> table
        real_test: labelled real rows never seen in training
        classifier_cfg: forest settings, shared by the baseline
        n_synthetic: rows to generate
        seed: generation seed
        schema: column layout of both tables
        label: binary target column
        real_train: real rows for the baseline forest; baseline is NaN without it
        epsilon: privacy of the generating model, reported alongside

    Raises:
        DegenerateOutputError: the generated label column holds a single class
    """
    synthetic = _as_source(generator)(n_synthetic, np.random.default_rng(seed))
    classes = synthetic[label].nunique() if len(synthetic) else 0
    if classes < 2:
        raise DegenerateOutputError(
            f"Generated label column '{label}' has {classes} distinct value(s) in {len(synthetic)} rows"
        )
    forest = random_forest_train(synthetic, label, classifier_cfg, schema)
    _, tstr = classify(forest, real_test, label, schema)

    baseline = math.nan
    if real_train is not None:
        reference = random_forest_train(real_train, label, classifier_cfg, schema)
        _, baseline = classify(reference, real_test, label, schema)

    logger.info(f"TSTR accuracy {tstr:.4f} (real-data baseline {baseline:.4f}) on {len(real_test)} test rows")
    return UtilityReport(tstr_accuracy=tstr, baseline_accuracy=baseline, epsilon=epsilon, n_synthetic=n_synthetic)


def report_frame(run_id: str, metrics: Mapping[str, float]) -> pd.DataFrame:
    return pd.DataFrame(
        [(run_id, name, float(value)) for name, value in metrics.items()], columns=REPORT_COLUMNS
    )


def write_report(path, run_id: str, metrics: Mapping[str, float]) -> Path:
    """Write ``run_id,metric,value`` rows, one per metric"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report_frame(run_id, metrics).to_csv(path, index=False, lineterminator='\n')
    return path


def read_report(path) -> dict:
    frame = pd.read_csv(path)
    return dict(zip(frame['metric'], frame['value']))
