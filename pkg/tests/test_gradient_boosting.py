#!/usr/bin/env python
# -*- coding:utf-8 -*-

import json

import numpy as np
import pytest

from model.gradient_boosting import GbConfig, GradientBoostingModel, gb_fit, gb_predict


def test_single_stump_fits_step_exactly():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    model = gb_fit(X, y, GbConfig(n_estimators=1, learning_rate=1.0, max_depth=1), multi_output=False)
    np.testing.assert_array_equal(gb_predict(model, X)[:, 0], y)
    assert model.n_trees == 1


def test_constant_targets_stop_early(rng):
    X = rng.normal(size=(30, 2))
    model = gb_fit(X, np.full((30, 2), 4.0), GbConfig(n_estimators=50))
    assert model.n_trees == 0
    np.testing.assert_array_equal(gb_predict(model, rng.normal(size=(3, 2))), np.full((3, 2), 4.0))


def test_training_rmse_is_non_increasing(rng):
    X = rng.uniform(-2.0, 2.0, size=(500, 3))
    Y = np.stack([np.sin(X[:, 0]) + X[:, 1] ** 2, X[:, 2] * X[:, 0]], axis=1) + 0.1 * rng.normal(size=(500, 2))
    model = gb_fit(X, Y, GbConfig(n_estimators=500, learning_rate=0.3, max_depth=4, seed=0))
    history = np.array(model.train_rmse_history)
    assert len(history) == model.n_trees + 1
    assert np.all(np.diff(history) <= 1e-10 * history[:-1])
    assert history[-1] < 0.5 * history[0]


def test_single_output_matches_multi_output_with_one_column(rng):
    X = rng.normal(size=(100, 2))
    y = (X[:, 0] > 0).astype(float) + 0.1 * X[:, 1]
    cfg = GbConfig(n_estimators=30, max_depth=3, seed=4)
    single = gb_fit(X, y, cfg, multi_output=False)
    multi = gb_fit(X, y.reshape(-1, 1), cfg, multi_output=True)
    queries = rng.normal(size=(20, 2))
    np.testing.assert_array_equal(gb_predict(single, queries), gb_predict(multi, queries))


def test_multi_output_width(rng):
    X = rng.normal(size=(60, 2))
    Y = rng.normal(size=(60, 4))
    model = gb_fit(X, Y, GbConfig(n_estimators=10, max_depth=2))
    assert model.n_outputs == 4
    assert gb_predict(model, X).shape == (60, 4)


def test_single_output_rejects_matrix_targets(rng):
    with pytest.raises(ValueError):
        gb_fit(rng.normal(size=(10, 2)), rng.normal(size=(10, 2)), GbConfig(n_estimators=2), multi_output=False)


def test_json_roundtrip(rng):
    X = rng.normal(size=(80, 3))
    Y = rng.normal(size=(80, 2))
    model = gb_fit(X, Y, GbConfig(n_estimators=25, max_depth=5, seed=1))
    restored = GradientBoostingModel.from_dict(json.loads(json.dumps(model.to_dict())))
    queries = rng.normal(size=(40, 3))
    np.testing.assert_array_equal(gb_predict(restored, queries), gb_predict(model, queries))


def test_is_deterministic(rng):
    X = rng.normal(size=(50, 2))
    y = rng.normal(size=50)
    cfg = GbConfig(n_estimators=15, max_depth=3, seed=7)
    a, b = gb_fit(X, y, cfg, multi_output=False), gb_fit(X, y, cfg, multi_output=False)
    np.testing.assert_array_equal(gb_predict(a, X), gb_predict(b, X))


def test_config_validation():
    with pytest.raises(ValueError):
        GbConfig(n_estimators=0)
    with pytest.raises(ValueError):
        GbConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        GbConfig(max_depth=0)
