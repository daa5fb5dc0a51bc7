#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Regressors trained inside each cluster. Fitted regressors are immutable and share one contract:
# predict() for a single sample, predict_matrix() for a batch, to_dict() / regressor_from_dict() for JSON.

from typing import Optional, Dict, Any, List, Union, Type
from dataclasses import dataclass, asdict, field
import warnings

import numpy as np

from dataset.utils import as_float_matrix, as_float_vector, check_n_features, default_rng, freeze
from .gradient_boosting import GbConfig, GradientBoostingModel, gb_fit
from .utils import pairwise_squared_distances, _row_chunks

REGRESSOR_KINDS = ("knn", "gb", "ols", "lasso", "linsvr")
MODEL_FORMAT_VERSION = 1


@dataclass
class KnnConfig:
    n_neighbors: int = 5

    def __post_init__(self):
        if self.n_neighbors < 1:
            raise ValueError(f"`n_neighbors` must be positive: {self.n_neighbors}")


@dataclass
class OlsConfig:
    jitter: float = 1e-10


@dataclass
class LassoConfig:
    lam: float = 0.01
    max_iter: int = 10000
    tol: float = 1e-8

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"`lam` must be nonnegative: {self.lam}")


@dataclass
class LinSvrConfig:
    C: float = 1.0
    epsilon: float = 0.1
    n_epochs: int = 50
    batch_size: int = 256
    eta0: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError(f"`C` must be positive: {self.C}")
        if self.epsilon < 0:
            raise ValueError(f"`epsilon` must be nonnegative: {self.epsilon}")
        if self.n_epochs < 1 or self.batch_size < 1:
            raise ValueError(f"`n_epochs` and `batch_size` must be positive.")


RegressorConfig = Union[KnnConfig, GbConfig, OlsConfig, LassoConfig, LinSvrConfig]

_CONFIG_CLASSES: Dict[str, Type] = {
    "knn": KnnConfig,
    "gb": GbConfig,
    "ols": OlsConfig,
    "lasso": LassoConfig,
    "linsvr": LinSvrConfig
}


def build_regressor_config(kind: str, **params) -> RegressorConfig:
    if kind not in _CONFIG_CLASSES:
        raise ValueError(f"unknown regressor kind: {kind}. available: {REGRESSOR_KINDS}")
    return _CONFIG_CLASSES[kind](**params)


class Regressor(object):

    kind = None

    def __init__(self, config: RegressorConfig, n_features: int, output_width: int):
        self._config = config
        self._n_features = n_features
        self._output_width = output_width

    @property
    def config(self) -> RegressorConfig:
        return self._config

    @property
    def n_features(self) -> int:
        return self._n_features

    @property
    def output_width(self) -> int:
        return self._output_width

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError()

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        """
        row-wise prediction. every output row depends only on the matching input row.

        @return: shape (n, output_width)
        """
        X = as_float_matrix(X, name="X", allow_empty=True)
        check_n_features(X, self._n_features)
        return self._predict_rows(X).reshape(X.shape[0], self._output_width)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = as_float_vector(x, name="x").reshape(1, -1)
        return self.predict_matrix(x)[0]

    def _state(self) -> Dict[str, Any]:
        raise NotImplementedError()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "config": asdict(self._config),
            "state": self._state()
        }

    @property
    def verbose(self):
        return {
            "kind": self.kind,
            "config": asdict(self._config),
            "n_features": self._n_features,
            "output_width": self._output_width
        }


class KnnRegressor(Regressor):

    kind = "knn"

    def __init__(self, config: KnnConfig, X: np.ndarray, Y: np.ndarray):
        super().__init__(config=config, n_features=X.shape[1], output_width=Y.shape[1])
        self._X = freeze(X.copy())
        self._Y = freeze(Y.copy())

    def neighbors(self, X: np.ndarray) -> np.ndarray:
        """indices of the nearest training points in order of distance; ties go to the lower index."""
        n_neighbors = self._config.n_neighbors
        ret = np.empty((X.shape[0], n_neighbors), dtype=np.int64)
        for begin, end in _row_chunks(X.shape[0], self._X.shape[0], X.shape[1]):
            distances = pairwise_squared_distances(X[begin:end], self._X)
            ret[begin:end] = np.argsort(distances, axis=1, kind="stable")[:, :n_neighbors]
        return ret

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        idx = self.neighbors(X)
        # (n, n_neighbors, width) -> mean over neighbors
        return self._Y[idx].sum(axis=1) / self._config.n_neighbors

    def _state(self):
        return {"X": self._X.tolist(), "Y": self._Y.tolist()}


class GbRegressor(Regressor):

    kind = "gb"

    def __init__(self, config: GbConfig, model: GradientBoostingModel):
        super().__init__(config=config, n_features=model.n_features, output_width=model.n_outputs)
        self._model = model

    @property
    def model(self) -> GradientBoostingModel:
        return self._model

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        return self._model.predict(X)

    def _state(self):
        return self._model.to_dict()


class LinearRegressor(Regressor):
    """shared container of the linear kinds: prediction = x . coef + intercept"""

    def __init__(self, config: RegressorConfig, coef: np.ndarray, intercept: float, info: Optional[Dict[str, Any]] = None):
        coef = np.asarray(coef, dtype=np.float64).reshape(-1)
        super().__init__(config=config, n_features=len(coef), output_width=1)
        self._coef = freeze(coef)
        self._intercept = float(intercept)
        self._info = {} if info is None else info

    @property
    def coef(self) -> np.ndarray:
        return self._coef

    @property
    def intercept(self) -> float:
        return self._intercept

    @property
    def info(self) -> Dict[str, Any]:
        return dict(self._info)

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        # elementwise product + row sum keeps every row independent of the batch (unlike BLAS gemv)
        return (X * self._coef).sum(axis=1) + self._intercept

    def _state(self):
        return {"coef": self._coef.tolist(), "intercept": self._intercept}


class OlsRegressor(LinearRegressor):
    kind = "ols"


class LassoRegressor(LinearRegressor):
    kind = "lasso"


class LinSvrRegressor(LinearRegressor):
    kind = "linsvr"


def _check_training_pair(X: np.ndarray, y: np.ndarray):
    X = as_float_matrix(X, name="X")
    y = as_float_matrix(y, name="y")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X and y row counts differ: {X.shape[0]} != {y.shape[0]}")
    return X, y


def _single_column(y: np.ndarray, kind: str) -> np.ndarray:
    if y.shape[1] != 1:
        raise ValueError(f"{kind} regressor is single-output; got {y.shape[1]} target columns.")
    return y[:, 0]


def knn_fit(X: np.ndarray, y: np.ndarray, cfg: KnnConfig) -> KnnRegressor:
    X, y = _check_training_pair(X, y)
    if cfg.n_neighbors > X.shape[0]:
        raise ValueError(f"n_neighbors exceeds the training size: {cfg.n_neighbors} > {X.shape[0]}")
    return KnnRegressor(config=cfg, X=X, Y=y)


def knn_predict(regressor: KnnRegressor, x_query: np.ndarray) -> np.ndarray:
    return regressor.predict(x_query)


def gb_regressor_fit(X: np.ndarray, y: np.ndarray, cfg: GbConfig, multi_output: bool = True) -> GbRegressor:
    model = gb_fit(X, y, cfg=cfg, multi_output=multi_output)
    return GbRegressor(config=cfg, model=model)


def _centered(X: np.ndarray, y: np.ndarray):
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    return X - x_mean, y - y_mean, x_mean, y_mean


def ols_fit(X: np.ndarray, y: np.ndarray, cfg: Optional[OlsConfig] = None) -> OlsRegressor:
    """
    least squares via the normal equations of the centered problem.
    singular (or rank-deficient) systems are solved with ridge jitter `cfg.jitter * trace / d`.
    """
    cfg = OlsConfig() if cfg is None else cfg
    X, y = _check_training_pair(X, y)
    y = _single_column(y, "ols")
    Xc, yc, x_mean, y_mean = _centered(X, y)

    gram = Xc.T @ Xc
    moment = Xc.T @ yc
    n_dim = gram.shape[0]
    jitter = 0.0
    if np.linalg.matrix_rank(gram) < n_dim:
        jitter = cfg.jitter * max(np.trace(gram), 1.0) / n_dim
        warnings.warn(f"singular normal equations: ridge jitter {jitter:.3e} is applied.")
    coef = np.linalg.solve(gram + jitter * np.eye(n_dim), moment)
    intercept = y_mean - float(x_mean @ coef)
    return OlsRegressor(config=cfg, coef=coef, intercept=intercept, info={"jitter": jitter})


def _soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    elif value < -threshold:
        return value + threshold
    return 0.0


def lasso_fit(X: np.ndarray, y: np.ndarray, cfg: Optional[LassoConfig] = None) -> LassoRegressor:
    """
    minimizes (1/2m) ||y - b - Xw||^2 + lam ||w||_1 by cyclic coordinate descent.
    the intercept b is not penalized. stops when the largest coefficient change in a sweep is below `tol`.
    """
    cfg = LassoConfig() if cfg is None else cfg
    X, y = _check_training_pair(X, y)
    y = _single_column(y, "lasso")
    Xc, yc, x_mean, y_mean = _centered(X, y)
    n_samples, n_dim = Xc.shape

    col_sq = np.sum(Xc * Xc, axis=0) / n_samples
    coef = np.zeros(n_dim, dtype=np.float64)
    residual = yc.copy()
    converged = False
    n_iter = 0
    for n_iter in range(1, cfg.max_iter + 1):
        max_change = 0.0
        for j in range(n_dim):
            if col_sq[j] == 0.0:
                continue
            rho = float(Xc[:, j] @ residual) / n_samples + col_sq[j] * coef[j]
            new_value = _soft_threshold(rho, cfg.lam) / col_sq[j]
            delta = new_value - coef[j]
            if delta != 0.0:
                residual -= delta * Xc[:, j]
                coef[j] = new_value
                max_change = max(max_change, abs(delta))
        if max_change < cfg.tol:
            converged = True
            break

    if not converged:
        warnings.warn(f"lasso coordinate descent reached max_iter={cfg.max_iter} without convergence.")
    intercept = y_mean - float(x_mean @ coef)
    return LassoRegressor(config=cfg, coef=coef, intercept=intercept, info={"n_iter": n_iter, "converged": converged})


def _svr_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, C: float, epsilon: float) -> float:
    residual = np.abs(y - (X @ w + b))
    return 0.5 * float(w @ w) + C * float(np.sum(np.maximum(residual - epsilon, 0.0)))


def linsvr_fit(X: np.ndarray, y: np.ndarray, cfg: Optional[LinSvrConfig] = None) -> LinSvrRegressor:
    """
    linear support vector regression: minimizes 0.5 ||w||^2 + C sum(max(0, |y - Xw - b| - epsilon)).
    targets are standardized internally, so epsilon is measured in target standard deviations.
    seeded mini-batch subgradient descent with step eta0 / sqrt(t); the iterate with the lowest
    objective among the epoch ends is returned.
    """
    cfg = LinSvrConfig() if cfg is None else cfg
    X, y = _check_training_pair(X, y)
    y = _single_column(y, "linsvr")
    n_samples, n_dim = X.shape

    y_mean, y_std = float(y.mean()), float(y.std())
    if y_std == 0.0:
        return LinSvrRegressor(config=cfg, coef=np.zeros(n_dim), intercept=y_mean, info={"n_epochs": 0})
    ys = (y - y_mean) / y_std

    # per-sample form of the objective: lam/2 ||w||^2 + mean(loss), lam = 1/(C m)
    lam = 1.0 / (cfg.C * n_samples)
    rng = default_rng(cfg.seed, "linsvr")
    w = np.zeros(n_dim, dtype=np.float64)
    b = 0.0
    best_w, best_b = w.copy(), b
    best_objective = _svr_objective(w, b, X, ys, cfg.C, cfg.epsilon)
    n_step = 0
    for _ in range(cfg.n_epochs):
        order = rng.permutation(n_samples)
        for begin in range(0, n_samples, cfg.batch_size):
            batch = order[begin:begin + cfg.batch_size]
            n_step += 1
            eta = cfg.eta0 / np.sqrt(n_step)
            residual = ys[batch] - (X[batch] @ w + b)
            slope = np.where(np.abs(residual) > cfg.epsilon, -np.sign(residual), 0.0)
            grad_w = lam * w + (slope @ X[batch]) / len(batch)
            grad_b = float(slope.mean())
            w = w - eta * grad_w
            b = b - eta * grad_b
        objective = _svr_objective(w, b, X, ys, cfg.C, cfg.epsilon)
        if objective < best_objective:
            best_objective, best_w, best_b = objective, w.copy(), b

    coef = best_w * y_std
    intercept = best_b * y_std + y_mean
    return LinSvrRegressor(config=cfg, coef=coef, intercept=intercept,
                           info={"n_epochs": cfg.n_epochs, "objective": best_objective})


def fit_regressor(X: np.ndarray, y: np.ndarray, cfg: RegressorConfig, multi_output: bool = False) -> Regressor:
    """dispatches on the config type. `multi_output` applies to gradient boosting only."""
    if isinstance(cfg, KnnConfig):
        return knn_fit(X, y, cfg)
    elif isinstance(cfg, GbConfig):
        return gb_regressor_fit(X, y, cfg, multi_output=multi_output)
    elif isinstance(cfg, OlsConfig):
        return ols_fit(X, y, cfg)
    elif isinstance(cfg, LassoConfig):
        return lasso_fit(X, y, cfg)
    elif isinstance(cfg, LinSvrConfig):
        return linsvr_fit(X, y, cfg)
    raise TypeError(f"unsupported regressor config: {type(cfg)}")


def predict_matrix(regressor: Regressor, X: np.ndarray) -> np.ndarray:
    return regressor.predict_matrix(X)


def regressor_from_dict(dict_model: Dict[str, Any]) -> Regressor:
    version = dict_model.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version: {version}")
    kind = dict_model["kind"]
    cfg = build_regressor_config(kind, **dict_model["config"])
    state = dict_model["state"]
    if kind == "knn":
        return KnnRegressor(config=cfg, X=np.array(state["X"], dtype=np.float64), Y=np.array(state["Y"], dtype=np.float64))
    elif kind == "gb":
        return GbRegressor(config=cfg, model=GradientBoostingModel.from_dict(state))
    elif kind == "ols":
        return OlsRegressor(config=cfg, coef=state["coef"], intercept=state["intercept"])
    elif kind == "lasso":
        return LassoRegressor(config=cfg, coef=state["coef"], intercept=state["intercept"])
    elif kind == "linsvr":
        return LinSvrRegressor(config=cfg, coef=state["coef"], intercept=state["intercept"])
    raise ValueError(f"unknown regressor kind: {kind}")


@dataclass
class RegressorSpec:
    """
    regressor choice of a pipeline: kind, its hyperparameters and whether one regressor is fitted
    per load (output width 1) or a single multi-output regressor covers all loads.
    multi-output is available for gradient boosting only.
    """
    name: str
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    per_load: bool = True

    def __post_init__(self):
        if self.kind not in REGRESSOR_KINDS:
            raise ValueError(f"unknown regressor kind: {self.kind}. available: {REGRESSOR_KINDS}")
        if (not self.per_load) and self.kind != "gb":
            raise ValueError(f"multi-output mode is only available for gradient boosting: {self.kind}")
        # fail early on invalid hyperparameters
        self.config()

    def config(self, seed: Optional[int] = None) -> RegressorConfig:
        params = dict(self.params)
        if (seed is not None) and ("seed" in _CONFIG_CLASSES[self.kind].__dataclass_fields__):
            params["seed"] = seed
        return build_regressor_config(self.kind, **params)

    @property
    def min_cluster_size(self) -> int:
        if self.kind == "knn":
            return max(self.config().n_neighbors, 2)
        return 2

    def fit(self, X: np.ndarray, Y: np.ndarray, seed: Optional[int] = None) -> List[Regressor]:
        """fits the regressor set of one cluster: L single-output regressors or one multi-output regressor."""
        cfg = self.config(seed=seed)
        Y = as_float_matrix(Y, name="Y")
        if self.per_load:
            return [fit_regressor(X, Y[:, [l]], cfg, multi_output=False) for l in range(Y.shape[1])]
        return [fit_regressor(X, Y, cfg, multi_output=True)]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, dict_spec: Dict[str, Any]) -> "RegressorSpec":
        return cls(**dict_spec)


def predict_regressor_set(regressors: List[Regressor], X: np.ndarray) -> np.ndarray:
    """stacks the outputs of a regressor set into shape (n, L)."""
    return np.hstack([regressor.predict_matrix(X) for regressor in regressors])
