#!/usr/bin/env python
# -*- coding:utf-8 -*-

import numpy as np
import pytest

from evaluator.metrics import rmse, rmse_per_load, r2


def test_rmse_hand_computed():
    assert rmse([[0.0, 0.0], [0.0, 0.0]], [[3.0, 4.0], [0.0, 0.0]]) == 2.5
    assert rmse_per_load([[0.0, 0.0], [0.0, 0.0]], [[3.0, 4.0], [0.0, 0.0]]) == pytest.approx([np.sqrt(4.5), np.sqrt(8.0)])


def test_rmse_of_constant_offset(rng):
    Y = rng.normal(size=(30, 3))
    assert rmse(Y, Y) == 0.0
    for c in [-2.5, 0.1, 7.0]:
        assert rmse(Y, Y + c) == pytest.approx(abs(c), rel=1e-12)


def test_rmse_of_mean_predictor_is_target_std(small_synthetic):
    Y = small_synthetic.targets
    assert rmse(Y, np.tile(Y.mean(), Y.shape)) == pytest.approx(np.std(Y), rel=1e-12)


def test_rmse_errors():
    with pytest.raises(ValueError):
        rmse(np.zeros((3, 2)), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        rmse(np.zeros((0, 2)), np.zeros((0, 2)))


def test_r2_reference_values(rng):
    Y = rng.normal(size=(50, 2))
    assert r2(Y, Y) == 1.0
    assert r2(Y, np.tile(Y.mean(axis=0), (50, 1))) == pytest.approx(0.0, abs=1e-12)
    assert r2(Y, -Y) < 0.0


def test_r2_is_invariant_to_affine_rescaling(rng):
    Y = rng.normal(size=(40, 3))
    Y_pred = Y + 0.3 * rng.normal(size=(40, 3))
    assert r2(5.0 * Y - 2.0, 5.0 * Y_pred - 2.0) == pytest.approx(r2(Y, Y_pred), rel=1e-10)


def test_r2_constant_targets():
    with pytest.raises(ValueError):
        r2(np.ones((5, 2)), np.zeros((5, 2)))
