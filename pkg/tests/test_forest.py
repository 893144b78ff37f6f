"""
Tests for the random forest classifier
"""

import numpy as np
import pytest

from dpgan.data import gaussian_mixture_schema, make_gaussian_mixture
from dpgan.errors import ConfigError, DataError, ShapeError
from dpgan.forest import (
    LEAF, ForestConfig, RandomForest, Tree, classify, fit_tree, gini, random_forest_train,
)


def _leaf(distribution):
    return Tree(
        np.array([LEAF]), np.array([0.0]), np.array([LEAF]), np.array([LEAF]), np.array([distribution], dtype=float),
    )


def _two_blobs(n, seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    X = rng.normal(size=(n, 3)) * 0.3
    X[:, 0] += 3.0 * y
    return X, y


def test_gini():
    np.testing.assert_allclose(gini(np.array([[5, 5], [10, 0], [0, 0], [1, 1]])), [0.5, 0.0, 0.0, 0.5])
    assert gini(np.array([2, 2, 2, 2])) == pytest.approx(0.75)


def test_config_validation():
    with pytest.raises(ConfigError):
        ForestConfig(n_trees=0)
    with pytest.raises(ConfigError):
        ForestConfig(max_features='log2')
    assert ForestConfig().features_per_split(10) == 3
    assert ForestConfig(max_features='all').features_per_split(10) == 10
    assert ForestConfig(max_features=50).features_per_split(10) == 10


def test_single_tree_separates_a_threshold():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 1, 1])
    tree = fit_tree(X, y, 2, ForestConfig(max_features='all'), np.random.default_rng(0))
    assert tree.feature[0] == 0
    assert tree.threshold[0] == pytest.approx(1.5)
    assert tree.depth == 1
    np.testing.assert_array_equal(np.argmax(tree.predict_proba(X), axis=1), y)


def test_depth_limit_is_respected():
    X, y = _two_blobs(200, 0)
    y = (np.random.default_rng(1).random(200) < 0.5).astype(int)
    for depth in (0, 1, 3):
        forest = RandomForest(ForestConfig(n_trees=4, max_depth=depth, seed=2)).fit(X, y)
        assert all(tree.depth <= depth for tree in forest.trees)


def test_forest_learns_separable_data():
    X, y = _two_blobs(200, 3)
    X_test, y_test = _two_blobs(100, 4)
    forest = RandomForest(ForestConfig(n_trees=15, seed=0, workers=1)).fit(X, y)
    assert forest.score(X_test, y_test) > 0.97


def test_parallel_fit_matches_serial():
    X, y = _two_blobs(120, 5)
    serial = RandomForest(ForestConfig(n_trees=8, seed=9, workers=1)).fit(X, y)
    parallel = RandomForest(ForestConfig(n_trees=8, seed=9, workers=4)).fit(X, y)
    for a, b in zip(serial.trees, parallel.trees):
        np.testing.assert_array_equal(a.feature, b.feature)
        np.testing.assert_array_equal(a.threshold, b.threshold)
    np.testing.assert_array_equal(serial.predict(X), parallel.predict(X))


def test_vote_ties_go_to_lower_class():
    forest = RandomForest(ForestConfig(n_trees=2), trees=[_leaf([0.0, 1.0]), _leaf([1.0, 0.0])], n_classes=2, n_features=1)
    np.testing.assert_array_equal(forest.predict(np.zeros((3, 1))), [0, 0, 0])


def test_fit_and_predict_errors():
    X, y = _two_blobs(20, 0)
    with pytest.raises(DataError, match="single-class"):
        RandomForest(ForestConfig(n_trees=2)).fit(X, np.zeros(20, dtype=int))
    with pytest.raises(ShapeError):
        RandomForest(ForestConfig(n_trees=2)).fit(X, y[:5])
    with pytest.raises(ConfigError):
        RandomForest().predict(X)
    forest = RandomForest(ForestConfig(n_trees=2)).fit(X, y)
    with pytest.raises(ShapeError):
        forest.predict(X[:, :2])


def test_mixture_components_are_recoverable():
    schema = gaussian_mixture_schema()
    train = make_gaussian_mixture(300, seed=0)
    test = make_gaussian_mixture(120, seed=1)
    forest = random_forest_train(train, 'component', ForestConfig(n_trees=10, seed=0), schema)
    predicted, accuracy = classify(forest, test, 'component', schema)
    assert accuracy > 0.95
    assert set(predicted) <= set(schema.column('component').levels)
    assert len(predicted) == len(test)
