#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Cluster-then-predict: the training data is partitioned by a clustering model and one regressor set
# ("bank") is trained per cluster. A query is routed to the bank of its nearest centroid.

from typing import Optional, List, Tuple, NamedTuple
import os, io, json, time

import numpy as np
from joblib import Parallel, delayed

from dataset import Dataset, StandardScaler
from dataset.utils import as_float_matrix, as_float_vector, check_n_features
from model.clustering import ClusterModel, ClusterConfig, fit_clusterer
from model.regressor import Regressor, RegressorSpec, predict_regressor_set, regressor_from_dict
from model.utils import nearest_centroid

PIPELINE_FORMAT_VERSION = 1
N_TIMING_REPEATS = 3


class ClusterSizeError(ValueError):

    def __init__(self, cluster_index: int, cluster_size: int, minimum: int):
        super().__init__(f"cluster {cluster_index} has {cluster_size} training sample(s); the regressor requires at least {minimum}.")
        self.cluster_index = cluster_index
        self.cluster_size = cluster_size
        self.minimum = minimum


class PredictionVector(NamedTuple):
    values: np.ndarray
    assigned_cluster: int


class TrainedPipeline(object):

    def __init__(self, cluster_model: ClusterModel, banks: List[List[Regressor]], regressor_spec: RegressorSpec,
                 cluster_sample_counts: List[int], n_targets: int,
                 scaler: Optional[StandardScaler] = None,
                 feature_names: Optional[List[str]] = None,
                 target_names: Optional[List[str]] = None,
                 seed: Optional[int] = None):
        if len(banks) != cluster_model.n_clusters:
            raise ValueError(f"number of banks {len(banks)} differs from number of clusters {cluster_model.n_clusters}")
        if len(cluster_sample_counts) != len(banks):
            raise ValueError(f"one sample count per cluster is required.")
        self._cluster_model = cluster_model
        self._banks = [list(bank) for bank in banks]
        self._regressor_spec = regressor_spec
        self._cluster_sample_counts = [int(n) for n in cluster_sample_counts]
        self._n_targets = n_targets
        self._scaler = scaler
        self._feature_names = None if feature_names is None else list(feature_names)
        self._target_names = None if target_names is None else list(target_names)
        self._seed = seed

    @property
    def cluster_model(self) -> ClusterModel:
        return self._cluster_model

    @property
    def banks(self) -> List[List[Regressor]]:
        return self._banks

    @property
    def regressor_spec(self) -> RegressorSpec:
        return self._regressor_spec

    @property
    def cluster_sample_counts(self) -> List[int]:
        return list(self._cluster_sample_counts)

    @property
    def n_clusters(self) -> int:
        return len(self._banks)

    @property
    def n_targets(self) -> int:
        return self._n_targets

    @property
    def n_features(self) -> int:
        return self._cluster_model.n_features

    @property
    def scaler(self) -> Optional[StandardScaler]:
        return self._scaler

    @property
    def feature_names(self) -> Optional[List[str]]:
        return self._feature_names

    @property
    def target_names(self) -> Optional[List[str]]:
        return self._target_names

    @property
    def seed(self) -> Optional[int]:
        return self._seed

    def assign(self, X: np.ndarray) -> np.ndarray:
        return self._cluster_model.assign(X)

    @property
    def verbose(self):
        ret = {
            "clusterer": self._cluster_model.method,
            "n_clusters": self.n_clusters,
            "regressor": self._regressor_spec.name,
            "n_targets": self._n_targets,
            "cluster_sample_counts": self._cluster_sample_counts,
            "seed": self._seed
        }
        return ret


def _fit_bank(regressor: RegressorSpec, X: np.ndarray, Y: np.ndarray, seed: Optional[int]) -> List[Regressor]:
    return regressor.fit(X, Y, seed=seed)


def train_divide_conquer(train: Dataset, clusterer: ClusterConfig, regressor: RegressorSpec,
                         n_targets: Optional[int] = None,
                         seed: Optional[int] = None,
                         scaler: Optional[StandardScaler] = None,
                         n_jobs: int = 1,
                         cluster_model: Optional[ClusterModel] = None,
                         verbose: bool = False) -> TrainedPipeline:
    """
    divide: cluster the training features and partition the samples by label (original order kept).
    conquer: fit one regressor set per cluster on that cluster's samples only.

    @param n_targets: number of loads. when given, it must equal the width of the training targets.
    @param seed: seed of the regressors. every bank uses the same seed so that a single cluster
                 reproduces the regressor trained on the full data.
    @param scaler: the scaler the training features were standardized with. stored as reference.
    @param n_jobs: banks are fitted concurrently on this many threads. results do not depend on it.
    @param cluster_model: pre-fitted clustering of `train.features`. skips the clustering step.
    """
    X, Y = train.features, train.targets
    if (n_targets is not None) and (n_targets != train.n_targets):
        raise ValueError(f"number of loads mismatch: expected {n_targets}, training data has {train.n_targets}")

    if cluster_model is None:
        cluster_model = fit_clusterer(X, clusterer)
    elif cluster_model.labels.shape[0] != train.n_samples:
        raise ValueError(f"cluster model was fitted on {cluster_model.labels.shape[0]} samples, not {train.n_samples}")
    labels = cluster_model.labels
    counts = np.bincount(labels, minlength=cluster_model.n_clusters)

    minimum = regressor.min_cluster_size
    for cluster_index, cluster_size in enumerate(counts):
        if cluster_size < minimum:
            raise ClusterSizeError(cluster_index=cluster_index, cluster_size=int(cluster_size), minimum=minimum)

    lst_indices = [np.flatnonzero(labels == cluster_index) for cluster_index in range(cluster_model.n_clusters)]
    if verbose:
        print(f"clusters: {cluster_model.n_clusters}, sizes: min={counts.min()}, max={counts.max()}")

    banks = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_fit_bank)(regressor, X[indices], Y[indices], seed) for indices in lst_indices
    )

    pipeline = TrainedPipeline(cluster_model=cluster_model, banks=banks, regressor_spec=regressor,
                               cluster_sample_counts=counts.tolist(), n_targets=train.n_targets,
                               scaler=scaler, feature_names=list(train.feature_names),
                               target_names=list(train.target_names), seed=seed)
    assert sum(pipeline.cluster_sample_counts) == train.n_samples, f"cluster sample counts must sum to the training size."
    return pipeline


def assign_to_cluster(x: np.ndarray, cluster_model: ClusterModel) -> int:
    """index of the nearest centroid by squared euclidean distance; ties go to the lowest index."""
    x = as_float_vector(x, name="x").reshape(1, -1)
    check_n_features(x, cluster_model.n_features, name="x")
    return int(nearest_centroid(x, cluster_model.centroids)[0])


def predict_sample(x: np.ndarray, pipeline: TrainedPipeline) -> PredictionVector:
    x = as_float_vector(x, name="x").reshape(1, -1)
    cluster_index = assign_to_cluster(x[0], pipeline.cluster_model)
    values = predict_regressor_set(pipeline.banks[cluster_index], x)[0]
    return PredictionVector(values=values, assigned_cluster=cluster_index)


def _predict_grouped(X: np.ndarray, pipeline: TrainedPipeline) -> np.ndarray:
    labels = nearest_centroid(X, pipeline.cluster_model.centroids)
    ret = np.empty((X.shape[0], pipeline.n_targets), dtype=np.float64)
    for cluster_index in np.unique(labels):
        rows = np.flatnonzero(labels == cluster_index)
        ret[rows] = predict_regressor_set(pipeline.banks[cluster_index], X[rows])
    return ret


def predict_batch(X_test: np.ndarray, pipeline: TrainedPipeline, n_repeats: int = N_TIMING_REPEATS) -> Tuple[np.ndarray, float]:
    """
    vectorized assignment followed by regression grouped by cluster.
    the input is expected to be scaled already; the elapsed time covers assignment and regression only.

    @return: (predictions of shape (n, L), median wall-clock seconds over `n_repeats` runs)
    """
    X_test = as_float_matrix(X_test, name="X_test", allow_empty=True)
    check_n_features(X_test, pipeline.n_features, name="X_test")
    if n_repeats < 1:
        raise ValueError(f"`n_repeats` must be positive: {n_repeats}")

    lst_elapsed = []
    predictions = None
    for _ in range(n_repeats):
        t_start = time.perf_counter()
        predictions = _predict_grouped(X_test, pipeline)
        lst_elapsed.append(time.perf_counter() - t_start)
    return predictions, float(np.median(lst_elapsed))


def save_pipeline(pipeline: TrainedPipeline, path: str):
    """
    writes the pipeline to a directory: manifest.json, cluster_model.json and one bank_XXXX.json per cluster.
    """
    os.makedirs(path, exist_ok=True)
    cluster_model = pipeline.cluster_model
    manifest = {
        "format_version": PIPELINE_FORMAT_VERSION,
        "n_targets": pipeline.n_targets,
        "n_clusters": pipeline.n_clusters,
        "cluster_sample_counts": pipeline.cluster_sample_counts,
        "clusterer": {"method": cluster_model.method, "config": cluster_model.config},
        "regressor": pipeline.regressor_spec.to_dict(),
        "seed": pipeline.seed,
        "scaler": None if pipeline.scaler is None else pipeline.scaler.to_dict(),
        "feature_names": pipeline.feature_names,
        "target_names": pipeline.target_names
    }
    with io.open(os.path.join(path, "manifest.json"), mode="w") as ofs:
        json.dump(manifest, ofs, indent=2)
    with io.open(os.path.join(path, "cluster_model.json"), mode="w") as ofs:
        json.dump(cluster_model.to_dict(), ofs)
    for cluster_index, bank in enumerate(pipeline.banks):
        with io.open(os.path.join(path, f"bank_{cluster_index:04d}.json"), mode="w") as ofs:
            json.dump([regressor.to_dict() for regressor in bank], ofs)


def load_pipeline(path: str) -> TrainedPipeline:
    path_manifest = os.path.join(path, "manifest.json")
    if not os.path.exists(path_manifest):
        raise IOError(f"pipeline manifest not found: {path_manifest}")
    with io.open(path_manifest, mode="r") as ifs:
        manifest = json.load(ifs)
    version = manifest.get("format_version")
    if version != PIPELINE_FORMAT_VERSION:
        raise ValueError(f"unsupported pipeline format version: {version}")

    with io.open(os.path.join(path, "cluster_model.json"), mode="r") as ifs:
        cluster_model = ClusterModel.from_dict(json.load(ifs))
    banks = []
    for cluster_index in range(manifest["n_clusters"]):
        with io.open(os.path.join(path, f"bank_{cluster_index:04d}.json"), mode="r") as ifs:
            banks.append([regressor_from_dict(dict_model) for dict_model in json.load(ifs)])

    scaler = None if manifest["scaler"] is None else StandardScaler.from_dict(manifest["scaler"])
    return TrainedPipeline(cluster_model=cluster_model, banks=banks,
                           regressor_spec=RegressorSpec.from_dict(manifest["regressor"]),
                           cluster_sample_counts=manifest["cluster_sample_counts"], n_targets=manifest["n_targets"],
                           scaler=scaler, feature_names=manifest["feature_names"], target_names=manifest["target_names"],
                           seed=manifest["seed"])
