#!/usr/bin/env python
# -*- coding:utf-8 -*-
from typing import Optional, List, Sequence, Iterator, Tuple, Dict, Any

import numpy as np

from .utils import as_float_matrix, freeze, Array_like


class Dataset(object):

    def __init__(self, features: Array_like, targets: Array_like,
                 feature_names: Optional[Sequence[str]] = None,
                 target_names: Optional[Sequence[str]] = None,
                 description: str = ""):
        """
        feature matrix X (m x d) paired with target matrix Y (m x L). immutable after construction.

        :param features: feature matrix. shape: (n_samples, n_features)
        :param targets: target (=load) matrix in ohms. shape: (n_samples, n_targets)
        :param feature_names: column labels of features. DEFAULT: f1, f2, ...
        :param target_names: column labels of targets. DEFAULT: y1, y2, ...
        :param description: free text.
        """
        features = as_float_matrix(features, name="features")
        targets = as_float_matrix(targets, name="targets")
        if features.shape[0] != targets.shape[0]:
            raise ValueError(f"features and targets must have identical row count: {features.shape[0]} != {targets.shape[0]}")

        if feature_names is None:
            feature_names = [f"f{idx+1}" for idx in range(features.shape[1])]
        if target_names is None:
            target_names = [f"y{idx+1}" for idx in range(targets.shape[1])]
        if len(feature_names) != features.shape[1]:
            raise ValueError(f"feature_names length mismatch: {len(feature_names)} != {features.shape[1]}")
        if len(target_names) != targets.shape[1]:
            raise ValueError(f"target_names length mismatch: {len(target_names)} != {targets.shape[1]}")

        self._features = freeze(features)
        self._targets = freeze(targets)
        self._feature_names = tuple(feature_names)
        self._target_names = tuple(target_names)
        self._description = description

    @property
    def features(self) -> np.ndarray:
        return self._features

    @property
    def targets(self) -> np.ndarray:
        return self._targets

    @property
    def feature_names(self) -> Tuple[str, ...]:
        return self._feature_names

    @property
    def target_names(self) -> Tuple[str, ...]:
        return self._target_names

    @property
    def n_samples(self) -> int:
        return self._features.shape[0]

    @property
    def n_features(self) -> int:
        return self._features.shape[1]

    @property
    def n_targets(self) -> int:
        return self._targets.shape[1]

    def __len__(self):
        return self.n_samples

    def __iter__(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        for x, y in zip(self._features, self._targets):
            yield x, y

    def subset(self, indices: Sequence[int], description: Optional[str] = None) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(features=self._features[indices], targets=self._targets[indices],
                       feature_names=self._feature_names, target_names=self._target_names,
                       description=self._description if description is None else description)

    def with_features(self, features: Array_like) -> "Dataset":
        """returns a copy whose features are replaced. targets and labels are kept."""
        return Dataset(features=features, targets=self._targets,
                       feature_names=self._feature_names, target_names=self._target_names,
                       description=self._description)

    @property
    def verbose(self) -> Dict[str, Any]:
        ret = {
            "n_samples": self.n_samples,
            "n_features": self.n_features,
            "n_targets": self.n_targets,
            "feature_names": list(self._feature_names),
            "target_names": list(self._target_names),
            "target_std": float(np.std(self._targets)),
            "description": self._description
        }
        return ret
