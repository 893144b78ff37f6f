#!/usr/bin/env python3
"""
Random forest of CART trees with Gini impurity

Trees are fitted on bootstrap samples with a random feature subset at every
split. Tree i draws from its own generator seeded with seed + i, so the forest
is identical whether trees are fitted serially or in parallel.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

try:
    from .data import Schema, feature_matrix
    from .errors import ConfigError, DataError, ShapeError
    from .settings import WORKERS
except ImportError:
    from data import Schema, feature_matrix
    from errors import ConfigError, DataError, ShapeError
    from settings import WORKERS

# Create logger for this module
logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 12
    max_features: Union[int, str] = 'sqrt'
    min_samples_split: int = 2
    bootstrap: bool = True
    seed: int = 0
    workers: int = WORKERS

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 0 or self.min_samples_split < 2 or self.workers < 1:
            raise ConfigError(
                "n_trees and workers must be positive, max_depth nonnegative, min_samples_split at least 2"
            )
        if isinstance(self.max_features, str) and self.max_features not in ('sqrt', 'all'):
            raise ConfigError(f"max_features must be an int, 'sqrt' or 'all', got '{self.max_features}'")

    def features_per_split(self, n_features: int) -> int:
        if self.max_features == 'sqrt':
            return max(1, int(math.sqrt(n_features)))
        if self.max_features == 'all':
            return n_features
        return max(1, min(int(self.max_features), n_features))


@dataclass
class Tree:
    """Flat array form: node i splits on feature[i] at threshold[i], or is a leaf"""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def depth(self) -> int:
        depths = np.zeros(len(self.feature), dtype=np.int64)
        for node in range(len(self.feature)):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[nodes] != LEAF
        while active.any():
            current = nodes[active]
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[nodes] != LEAF
        return self.value[nodes]


def gini(counts: np.ndarray) -> np.ndarray:
    """Gini impurity of class-count rows; an empty node is pure"""
    totals = counts.sum(axis=-1, keepdims=True)
    shares = np.divide(counts, totals, out=np.zeros_like(counts, dtype=np.float64), where=totals > 0)
    return np.where(totals[..., 0] > 0, 1.0 - np.sum(shares * shares, axis=-1), 0.0)


def _best_split(X, y, n_classes, features) -> Tuple[float, int, float]:
    """Lowest weighted child impurity over the candidate features"""
    n = len(y)
    best = (math.inf, LEAF, 0.0)
    for f in features:
        order = np.argsort(X[:, f], kind='stable')
        xs = X[order, f]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        onehot = np.eye(n_classes)[y[order]]
        left = np.cumsum(onehot, axis=0)[:-1]
        right = onehot.sum(axis=0) - left
        n_left = np.arange(1, n)
        impurity = (n_left * gini(left) + (n - n_left) * gini(right)) / n
        impurity = np.where(valid, impurity, math.inf)
        i = int(np.argmin(impurity))
        if impurity[i] < best[0]:
            best = (float(impurity[i]), int(f), float((xs[i] + xs[i + 1]) / 2.0))
    return best


def fit_tree(X: np.ndarray, y: np.ndarray, n_classes: int, cfg: ForestConfig, rng: np.random.Generator) -> Tree:
    n_features = X.shape[1]
    k = cfg.features_per_split(n_features)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(indices):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(np.bincount(y[indices], minlength=n_classes) / len(indices))
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)), 0)]
    while stack:
        node, indices, depth = stack.pop()
        counts = np.bincount(y[indices], minlength=n_classes)
        if depth >= cfg.max_depth or len(indices) < cfg.min_samples_split or np.count_nonzero(counts) < 2:
            continue
        chosen = rng.choice(n_features, size=k, replace=False)
        _, split_feature, split_value = _best_split(X[indices], y[indices], n_classes, chosen)
        if split_feature == LEAF:
            # Every sampled feature is constant here; fall back to the rest
            rest = np.setdiff1d(np.arange(n_features), chosen)
            _, split_feature, split_value = _best_split(X[indices], y[indices], n_classes, rest)
            if split_feature == LEAF:
                continue
        goes_left = X[indices, split_feature] <= split_value
        left_node, right_node = new_node(indices[goes_left]), new_node(indices[~goes_left])
        feature[node], threshold[node] = split_feature, split_value
        left[node], right[node] = left_node, right_node
        stack.append((right_node, indices[~goes_left], depth + 1))
        stack.append((left_node, indices[goes_left], depth + 1))

    return Tree(
        np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64), np.array(value),
    )


def _fit_member(X, y, n_classes, cfg: ForestConfig, index: int) -> Tree:
    rng = np.random.default_rng(cfg.seed + index)
    if cfg.bootstrap:
        sample = rng.integers(0, len(y), size=len(y))
        return fit_tree(X[sample], y[sample], n_classes, cfg, rng)
    return fit_tree(X, y, n_classes, cfg, rng)


@dataclass
class RandomForest:
    cfg: ForestConfig = field(default_factory=ForestConfig)
    trees: List[Tree] = field(default_factory=list)
    n_classes: int = 0
    n_features: int = 0
    levels: Optional[Tuple[str, ...]] = None

    def fit(self, X, y) -> 'RandomForest':
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(y) != X.shape[0]:
            raise ShapeError(f"Features {X.shape} and labels {y.shape} do not line up")
        if len(np.unique(y)) < 2:
            raise DataError("Cannot train a classifier on a single-class training set")
        self.n_classes = max(self.n_classes, int(y.max()) + 1)
        self.n_features = X.shape[1]
        self.trees = Parallel(n_jobs=self.cfg.workers, prefer='threads')(
            delayed(_fit_member)(X, y, self.n_classes, self.cfg, i) for i in range(self.cfg.n_trees)
        )
        logger.debug(f"Fitted {len(self.trees)} trees on {X.shape[0]} rows x {X.shape[1]} features")
        return self

    def predict(self, X) -> np.ndarray:
        """Majority vote; ties go to the lower class index"""
        X = np.asarray(X, dtype=np.float64)
        if not self.trees:
            raise ConfigError("Forest has not been fitted")
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(f"Expected (n, {self.n_features}) features, got {X.shape}")
        votes = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            votes[np.arange(X.shape[0]), np.argmax(tree.predict_proba(X), axis=1)] += 1.0
        return np.argmax(votes, axis=1)

    def score(self, X, y) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))


def random_forest_train(table: pd.DataFrame, label: str, cfg: ForestConfig, schema: Schema) -> RandomForest:
    """Fit a forest predicting ``label`` from every other schema column"""
    X, y = feature_matrix(table, schema, label)
    forest = RandomForest(cfg=cfg, n_classes=len(schema.column(label).levels))
    forest.levels = schema.column(label).levels
    return forest.fit(X, y)


def classify(forest: RandomForest, table: pd.DataFrame, label: str, schema: Schema) -> Tuple[np.ndarray, float]:
    """
    Predicted label levels and accuracy against the table's label column
    """
    X, y = feature_matrix(table, schema, label)
    predicted = forest.predict(X)
    levels = np.asarray(forest.levels or schema.column(label).levels, dtype=object)
    accuracy = float(np.mean(predicted == y)) if len(y) else math.nan
    return levels[predicted], accuracy

