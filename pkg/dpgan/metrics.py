#!/usr/bin/env python3
"""
Distribution and sequence distances: 1-D and sliced Wasserstein-1, DTW
"""

import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
import pandas as pd
from numba import njit
from scipy.stats import wasserstein_distance

try:
    from .data import CATEGORICAL, CONTINUOUS, Schema
    from .errors import DataError, ShapeError
except ImportError:
    from data import CATEGORICAL, CONTINUOUS, Schema
    from errors import DataError, ShapeError

# Create logger for this module
logger = logging.getLogger(__name__)

DEFAULT_PROJECTIONS = 50


def _samples(values, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64).reshape(-1)
    if array.size == 0:
        raise DataError(f"{what} is empty")
    if not np.all(np.isfinite(array)):
        raise DataError(f"{what} contains non-finite values")
    return array


def wasserstein1_1d(a, b) -> float:
    """
    W1 between two empirical distributions on the line

    Equal sizes reduce to mean |a_(i) - b_(i)| over sorted samples; otherwise
    it is the integral of |F_a - F_b|, the quantile-coupling cost.
    """
    return float(wasserstein_distance(_samples(a, 'first sample'), _samples(b, 'second sample')))


def random_directions(count: int, dim: int, seed: int) -> np.ndarray:
    """Uniform unit vectors on the (dim - 1)-sphere"""
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((count, dim))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def sliced_wasserstein(A, B, n_projections: int = DEFAULT_PROJECTIONS, seed: int = 0) -> float:
    """Mean 1-D W1 of the projections of A and B onto random unit directions"""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ShapeError(f"Sample sets have shapes {A.shape} and {B.shape}; need (n, d) and (m, d)")
    if n_projections < 1:
        raise ShapeError(f"n_projections must be positive, got {n_projections}")
    directions = random_directions(n_projections, A.shape[1], seed)
    return float(np.mean([wasserstein1_1d(A @ u, B @ u) for u in directions]))


@njit(cache=True)
def _dtw_cost(a, b):
    n, m = a.shape[0], b.shape[0]
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = abs(a[i - 1] - b[j - 1])
            acc[i, j] = cost + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return acc[n, m]


@njit(cache=True)
def _nearest(generated, real):
    count = generated.shape[0]
    distances = np.empty(count)
    indices = np.empty(count, dtype=np.int64)
    for k in range(count):
        best, best_index = np.inf, -1
        for r in range(real.shape[0]):
            d = _dtw_cost(generated[k], real[r])
            if d < best:
                best, best_index = d, r
        distances[k] = best
        indices[k] = best_index
    return distances, indices


def dtw(a, b) -> float:
    """Unconstrained DTW with absolute-difference local cost"""
    return float(_dtw_cost(_samples(a, 'first series'), _samples(b, 'second series')))


@dataclass(frozen=True)
class NearestMatches:
    """For each generated series: DTW to the closest real series and its index"""
    distances: np.ndarray
    indices: np.ndarray

    def summary(self) -> Dict[str, float]:
        return {
            'mean': float(np.mean(self.distances)),
            'median': float(np.median(self.distances)),
            'max': float(np.max(self.distances)),
        }


def nearest_dtw(generated, real) -> NearestMatches:
    generated = np.asarray(generated, dtype=np.float64)
    real = np.asarray(real, dtype=np.float64)
    if generated.ndim != 2 or real.ndim != 2:
        raise ShapeError(f"Series sets must be 2-D, got {generated.shape} and {real.shape}")
    if generated.shape[0] == 0 or real.shape[0] == 0 or generated.shape[1] == 0 or real.shape[1] == 0:
        raise DataError("nearest_dtw needs nonempty series sets")
    distances, indices = _nearest(generated, real)
    return NearestMatches(distances, indices)


def column_distances(real: pd.DataFrame, synthetic: pd.DataFrame, schema: Schema) -> Dict[str, float]:
    """
    Per-column marginal distances in original units

    Continuous columns report W1 as ``w1/<name>``; categorical columns report
    the total-variation distance between level frequencies as ``tv/<name>``.
    Series columns are compared with DTW elsewhere.
    """
    results = {}
    for column in schema.columns:
        if column.kind == CONTINUOUS:
            results[f"w1/{column.name}"] = wasserstein1_1d(real[column.name], synthetic[column.name])
        elif column.kind == CATEGORICAL:
            p = real[column.name].value_counts(normalize=True).reindex(column.levels, fill_value=0.0)
            r = synthetic[column.name].value_counts(normalize=True).reindex(column.levels, fill_value=0.0)
            results[f"tv/{column.name}"] = float(0.5 * np.abs(p.to_numpy() - r.to_numpy()).sum())
    return results
