#!/usr/bin/env python
# -*- coding:utf-8 -*-

from typing import List

import numpy as np

from dataset.utils import as_float_matrix


def _check_pair(Y_true, Y_pred):
    Y_true = as_float_matrix(Y_true, name="Y_true")
    Y_pred = as_float_matrix(Y_pred, name="Y_pred")
    if Y_true.shape != Y_pred.shape:
        raise ValueError(f"shape mismatch: {Y_true.shape} != {Y_pred.shape}")
    return Y_true, Y_pred


def rmse(Y_true, Y_pred) -> float:
    """root mean squared error pooled over all m x L entries."""
    Y_true, Y_pred = _check_pair(Y_true, Y_pred)
    diff = Y_true - Y_pred
    return float(np.sqrt(np.mean(diff * diff)))


def rmse_per_load(Y_true, Y_pred) -> List[float]:
    Y_true, Y_pred = _check_pair(Y_true, Y_pred)
    diff = Y_true - Y_pred
    return np.sqrt(np.mean(diff * diff, axis=0)).tolist()


def r2(Y_true, Y_pred) -> float:
    """
    pooled coefficient of determination: 1 - SS_res / SS_tot where both sums run over all entries
    and SS_tot is taken about the per-column means.
    """
    Y_true, Y_pred = _check_pair(Y_true, Y_pred)
    residual = Y_true - Y_pred
    deviation = Y_true - Y_true.mean(axis=0)
    ss_res = float(np.sum(residual * residual))
    ss_tot = float(np.sum(deviation * deviation))
    if ss_tot == 0.0:
        raise ValueError(f"R^2 is undefined for constant targets.")
    return 1.0 - ss_res / ss_tot
