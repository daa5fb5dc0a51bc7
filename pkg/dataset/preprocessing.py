#!/usr/bin/env python
# -*- coding:utf-8 -*-

from typing import Tuple, Dict, Any, List
from dataclasses import dataclass, asdict
import math

import numpy as np

from ._base import Dataset
from .utils import as_float_matrix, as_float_vector, check_n_features, default_rng, freeze, Array_like


@dataclass
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError(f"`train_fraction` must be in (0,1): {self.train_fraction}")
        if self.seed < 0:
            raise ValueError(f"`seed` must be unsigned: {self.seed}")


def split(dataset: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset]:
    """
    shuffles rows with `spec.seed`, then the first floor(m * train_fraction) rows go to the trainset.
    """
    n_samples = dataset.n_samples
    if n_samples < 2:
        raise ValueError(f"at least two samples are required for splitting: {n_samples}")

    n_train = int(math.floor(n_samples * spec.train_fraction))
    if n_train == 0 or n_train == n_samples:
        raise ValueError(f"empty partition: train_fraction={spec.train_fraction} with {n_samples} samples gives {n_train} training rows.")

    permutation = default_rng(spec.seed).permutation(n_samples)
    trainset = dataset.subset(permutation[:n_train], description="train split")
    testset = dataset.subset(permutation[n_train:], description="test split")
    return trainset, testset


class StandardScaler(object):

    def __init__(self, means: Array_like, stds: Array_like):
        """
        per-feature z-score standardization. stds use the population convention (divide by m).
        """
        means = as_float_vector(means, name="means")
        stds = as_float_vector(stds, name="stds")
        if means.shape != stds.shape:
            raise ValueError(f"means and stds length mismatch: {means.shape} != {stds.shape}")
        if np.any(stds <= 0.0):
            raise ValueError(f"stds must be positive: {stds.tolist()}")
        self._means = freeze(means)
        self._stds = freeze(stds)

    @property
    def means(self) -> np.ndarray:
        return self._means

    @property
    def stds(self) -> np.ndarray:
        return self._stds

    @property
    def n_features(self) -> int:
        return self._means.shape[0]

    @classmethod
    def fit(cls, X: Array_like) -> "StandardScaler":
        X = as_float_matrix(X, name="X")
        means = X.mean(axis=0)
        stds = X.std(axis=0, ddof=0)
        zero_variance = np.flatnonzero(stds == 0.0)
        if len(zero_variance) > 0:
            raise ValueError(f"zero-variance feature(s) at column index {zero_variance.tolist()}; standardization is undefined.")
        return cls(means=means, stds=stds)

    def transform(self, X: Array_like) -> np.ndarray:
        X = as_float_matrix(X, name="X", allow_empty=True)
        check_n_features(X, self.n_features)
        return (X - self._means) / self._stds

    def inverse_transform(self, X: Array_like) -> np.ndarray:
        X = as_float_matrix(X, name="X", allow_empty=True)
        check_n_features(X, self.n_features)
        return X * self._stds + self._means

    def to_dict(self) -> Dict[str, List[float]]:
        return {"means": self._means.tolist(), "stds": self._stds.tolist()}

    @classmethod
    def from_dict(cls, dict_scaler: Dict[str, Any]) -> "StandardScaler":
        return cls(means=dict_scaler["means"], stds=dict_scaler["stds"])


def fit_scaler(trainset: Dataset) -> StandardScaler:
    return StandardScaler.fit(trainset.features)


def apply_scaler(scaler: StandardScaler, dataset: Dataset) -> Dataset:
    """standardizes features with the (train) statistics held by `scaler`. targets are untouched."""
    return dataset.with_features(scaler.transform(dataset.features))
