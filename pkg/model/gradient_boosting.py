#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Gradient boosting with squared loss. Every round grows one exact-greedy regression tree on the
# current residuals; multi-output trees carry vector-valued leaves and split on the variance
# reduction summed across outputs. Trees are kept as flat node arrays for prediction and JSON.

from typing import Optional, Dict, Any, List
from dataclasses import dataclass, asdict

import numpy as np
from sklearn.tree import DecisionTreeRegressor

from dataset.utils import as_float_matrix, derive_seed, freeze

_LEAF = -1


@dataclass
class GbConfig:
    n_estimators: int = 500
    learning_rate: float = 0.3
    max_depth: int = 7
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError(f"`n_estimators` must be positive: {self.n_estimators}")
        if self.learning_rate <= 0:
            raise ValueError(f"`learning_rate` must be positive: {self.learning_rate}")
        if self.max_depth < 1:
            raise ValueError(f"`max_depth` must be positive: {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"`min_samples_leaf` must be positive: {self.min_samples_leaf}")


class RegressionTree(object):

    def __init__(self, feature: np.ndarray, threshold: np.ndarray, left: np.ndarray, right: np.ndarray,
                 value: np.ndarray):
        """
        binary tree as node arrays. node 0 is the root; leaves have left == right == -1.
        a sample goes to the left child when x[feature] <= threshold.

        :param value: node outputs, shape (n_nodes, n_outputs)
        """
        self._feature = freeze(np.asarray(feature, dtype=np.int64))
        self._threshold = freeze(np.asarray(threshold, dtype=np.float64))
        self._left = freeze(np.asarray(left, dtype=np.int64))
        self._right = freeze(np.asarray(right, dtype=np.int64))
        self._value = freeze(np.asarray(value, dtype=np.float64).reshape(len(self._feature), -1))

    @classmethod
    def from_estimator(cls, estimator: DecisionTreeRegressor) -> "RegressionTree":
        tree = estimator.tree_
        is_leaf = tree.children_left == _LEAF
        # leaves carry placeholder feature ids; pin them to a valid column.
        feature = np.where(is_leaf, 0, tree.feature)
        return cls(feature=feature, threshold=tree.threshold, left=tree.children_left, right=tree.children_right,
                   value=tree.value[:, :, 0])

    @property
    def n_nodes(self) -> int:
        return len(self._feature)

    @property
    def n_outputs(self) -> int:
        return self._value.shape[1]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """
        leaf index of every row. features are compared in single precision, the precision the
        tree was grown in.
        """
        X = np.asarray(X, dtype=np.float32)
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self._left[nodes] != _LEAF
        while np.any(active):
            idx_nodes = nodes[active]
            go_left = X[rows[active], self._feature[idx_nodes]] <= self._threshold[idx_nodes]
            nodes[active] = np.where(go_left, self._left[idx_nodes], self._right[idx_nodes])
            active = self._left[nodes] != _LEAF
        return nodes

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self._value[self.apply(X)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self._feature.tolist(),
            "threshold": self._threshold.tolist(),
            "left": self._left.tolist(),
            "right": self._right.tolist(),
            "value": self._value.tolist()
        }

    @classmethod
    def from_dict(cls, dict_tree: Dict[str, Any]) -> "RegressionTree":
        return cls(**dict_tree)


class GradientBoostingModel(object):

    def __init__(self, init_prediction: np.ndarray, trees: List[RegressionTree], learning_rate: float, n_features: int,
                 train_rmse_history: Optional[List[float]] = None):
        self._init_prediction = freeze(np.asarray(init_prediction, dtype=np.float64).reshape(-1))
        self._trees = list(trees)
        self._learning_rate = float(learning_rate)
        self._n_features = int(n_features)
        self._train_rmse_history = [] if train_rmse_history is None else list(train_rmse_history)

    @property
    def n_outputs(self) -> int:
        return len(self._init_prediction)

    @property
    def n_features(self) -> int:
        return self._n_features

    @property
    def n_trees(self) -> int:
        return len(self._trees)

    @property
    def train_rmse_history(self) -> List[float]:
        """training RMSE after stage 0 and after every boosting round."""
        return list(self._train_rmse_history)

    def predict(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self._n_features:
            raise ValueError(f"feature dimension mismatch: expected {self._n_features}, got {X.shape[1]}")
        ret = np.tile(self._init_prediction, (X.shape[0], 1))
        for tree in self._trees:
            ret += self._learning_rate * tree.predict(X)
        return ret

    def to_dict(self) -> Dict[str, Any]:
        return {
            "init_prediction": self._init_prediction.tolist(),
            "learning_rate": self._learning_rate,
            "n_features": self._n_features,
            "trees": [tree.to_dict() for tree in self._trees]
        }

    @classmethod
    def from_dict(cls, dict_state: Dict[str, Any]) -> "GradientBoostingModel":
        trees = [RegressionTree.from_dict(dict_tree) for dict_tree in dict_state["trees"]]
        return cls(init_prediction=np.array(dict_state["init_prediction"]), trees=trees,
                   learning_rate=dict_state["learning_rate"], n_features=dict_state["n_features"])


def _rmse(residuals: np.ndarray) -> float:
    return float(np.sqrt(np.mean(residuals * residuals)))


def gb_fit(X: np.ndarray, Y: np.ndarray, cfg: GbConfig, multi_output: bool = True) -> GradientBoostingModel:
    """
    fits a boosted ensemble. stage 0 is the column-wise target mean.

    @param Y: targets. width L when `multi_output`, width 1 otherwise. the single-output case runs the
              same code path, so a multi-output fit with L=1 is identical to a single-output fit.
    """
    X = as_float_matrix(X, name="X")
    Y = as_float_matrix(Y, name="Y")
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"X and Y row counts differ: {X.shape[0]} != {Y.shape[0]}")
    if (not multi_output) and Y.shape[1] != 1:
        raise ValueError(f"single-output boosting expects one target column: {Y.shape[1]}")

    init_prediction = Y.mean(axis=0)
    prediction = np.tile(init_prediction, (Y.shape[0], 1))
    residuals = Y - prediction
    lst_rmse = [_rmse(residuals)]
    lst_trees = []

    for n_round in range(cfg.n_estimators):
        if not np.any(residuals):
            break
        estimator = DecisionTreeRegressor(max_depth=cfg.max_depth, min_samples_leaf=cfg.min_samples_leaf,
                                          random_state=derive_seed(cfg.seed, "gb", n_round) % (2**31))
        estimator.fit(X, residuals)
        tree = RegressionTree.from_estimator(estimator)
        lst_trees.append(tree)

        prediction += cfg.learning_rate * tree.predict(X)
        residuals = Y - prediction
        lst_rmse.append(_rmse(residuals))

    return GradientBoostingModel(init_prediction=init_prediction, trees=lst_trees, learning_rate=cfg.learning_rate,
                                 n_features=X.shape[1], train_rmse_history=lst_rmse)


def gb_predict(model: GradientBoostingModel, X: np.ndarray) -> np.ndarray:
    X = as_float_matrix(X, name="X", allow_empty=True)
    return model.predict(X)
