#!/usr/bin/env python3
"""
Synthetic benchmark data: six Gaussians and labelled daily time series
"""

import logging
from pathlib import Path
from typing import Tuple

try:
    from ..data import (
        DEFAULT_SERIES_LENGTH, gaussian_mixture_schema, make_gaussian_mixture, make_timeseries,
        timeseries_schema, write_csv, write_schema,
    )
    from ..errors import ConfigError
    from ..run_config import write_command_config
except ImportError:
    from dpgan.data import (
        DEFAULT_SERIES_LENGTH, gaussian_mixture_schema, make_gaussian_mixture, make_timeseries,
        timeseries_schema, write_csv, write_schema,
    )
    from dpgan.errors import ConfigError
    from dpgan.run_config import write_command_config

# Create logger for this module
logger = logging.getLogger(__name__)

GAUSSIANS = 'gaussians'
TIMESERIES = 'timeseries'
KINDS = (GAUSSIANS, TIMESERIES)


def run_synth_data(kind: str, n: int, seed: int, out, length: int = DEFAULT_SERIES_LENGTH,
                   n_regions: int = 4) -> Tuple[Path, Path]:
    """
    Write a benchmark CSV, its schema (``<out>.schema``) and the resolved settings

    Returns:
        tuple: (csv path, schema path)
    """
    if kind == GAUSSIANS:
        table, schema = make_gaussian_mixture(n, seed), gaussian_mixture_schema()
    elif kind == TIMESERIES:
        table, schema = make_timeseries(n, length, seed, n_regions), timeseries_schema(length, n_regions)
    else:
        raise ConfigError(f"Unknown synthetic data kind '{kind}' (expected one of {list(KINDS)})")
    csv_path = write_csv(table, out, schema)
    schema_path = write_schema(schema, Path(out).with_suffix('.schema'))
    settings = {'kind': kind, 'n': n, 'seed': seed, 'out': csv_path.resolve()}
    if kind == TIMESERIES:
        settings.update(length=length, n_regions=n_regions)
    write_command_config(csv_path.parent, 'synth-data', settings)
    logger.info(f"Wrote {n} {kind} rows to {csv_path} (schema {schema_path})")
    return csv_path, schema_path
