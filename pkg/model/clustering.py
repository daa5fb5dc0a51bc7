#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Clustering methods used for the divide step: K-means, OT K-means, DBSCAN and Mean Shift.
# Every method materializes centroids so that queries can be routed to the nearest cluster.

from typing import Optional, Dict, Any, List, Tuple, Union
from dataclasses import dataclass, asdict
import warnings

import numpy as np
from sklearn.cluster import DBSCAN

from dataset.utils import as_float_matrix, default_rng, freeze
from .sinkhorn import sinkhorn_log
from .utils import pairwise_squared_distances, nearest_centroid, member_means, within_cluster_sse

CLUSTERING_METHODS = ("kmeans", "ot_kmeans", "dbscan", "meanshift")


class AllNoiseError(ValueError):
    pass


@dataclass
class KMeansConfig:
    k: int
    n_init: int = 10
    max_iter: int = 300
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"`k` must be positive: {self.k}")
        if self.n_init < 1 or self.max_iter < 1:
            raise ValueError(f"`n_init` and `max_iter` must be positive: {self.n_init}, {self.max_iter}")
        if self.tol < 0:
            raise ValueError(f"`tol` must be nonnegative: {self.tol}")


@dataclass
class OtKMeansConfig:
    k: int
    reg: float = 0.1
    sinkhorn_max_iter: int = 1000
    sinkhorn_tol: float = 1e-9
    outer_max_iter: int = 100
    tol: float = 1e-6
    warmstart: bool = True
    strict: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"`k` must be positive: {self.k}")
        if self.reg <= 0:
            raise ValueError(f"`reg` must be positive: {self.reg}")
        if self.sinkhorn_max_iter < 1 or self.outer_max_iter < 1:
            raise ValueError(f"iteration caps must be positive.")


@dataclass
class DbscanConfig:
    eps: float
    min_samples: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError(f"`eps` must be positive: {self.eps}")
        if self.min_samples < 1:
            raise ValueError(f"`min_samples` must be positive: {self.min_samples}")


@dataclass
class MeanShiftConfig:
    bandwidth: float
    max_iter: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError(f"`bandwidth` must be positive: {self.bandwidth}")


ClusterConfig = Union[KMeansConfig, OtKMeansConfig, DbscanConfig, MeanShiftConfig]

_CONFIG_CLASSES = {
    "kmeans": KMeansConfig,
    "ot_kmeans": OtKMeansConfig,
    "dbscan": DbscanConfig,
    "meanshift": MeanShiftConfig
}


def config_to_method(cfg: ClusterConfig) -> str:
    for method, CLASS in _CONFIG_CLASSES.items():
        if isinstance(cfg, CLASS):
            return method
    raise TypeError(f"unsupported clustering config: {type(cfg)}")


def build_cluster_config(method: str, **params) -> ClusterConfig:
    if method not in _CONFIG_CLASSES:
        raise ValueError(f"unknown clustering method: {method}. available: {CLUSTERING_METHODS}")
    return _CONFIG_CLASSES[method](**params)


class ClusterModel(object):

    def __init__(self, centroids: np.ndarray, labels: np.ndarray, method: str,
                 config: Optional[Dict[str, Any]] = None,
                 info: Optional[Dict[str, Any]] = None):
        """
        centroids (k x d) plus the cluster index of every training point. immutable.

        :param method: one of kmeans, ot_kmeans, dbscan, meanshift
        :param config: echo of the fit configuration.
        :param info: fit diagnostics (sse, iterations, ...).
        """
        centroids = as_float_matrix(centroids, name="centroids")
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if method not in CLUSTERING_METHODS:
            raise ValueError(f"unknown clustering method: {method}")
        if labels.size > 0 and (labels.min() < 0 or labels.max() >= centroids.shape[0]):
            raise ValueError(f"labels must index a valid centroid in [0, {centroids.shape[0]})")

        self._centroids = freeze(centroids)
        self._labels = freeze(labels)
        self._method = method
        self._config = {} if config is None else dict(config)
        self._info = {} if info is None else dict(info)

    @property
    def centroids(self) -> np.ndarray:
        return self._centroids

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def method(self) -> str:
        return self._method

    @property
    def config(self) -> Dict[str, Any]:
        return dict(self._config)

    @property
    def info(self) -> Dict[str, Any]:
        return dict(self._info)

    @property
    def n_clusters(self) -> int:
        return self._centroids.shape[0]

    @property
    def n_features(self) -> int:
        return self._centroids.shape[1]

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self._labels, minlength=self.n_clusters)

    def assign(self, X: np.ndarray) -> np.ndarray:
        X = as_float_matrix(X, name="X", allow_empty=True)
        if X.shape[1] != self.n_features:
            raise ValueError(f"feature dimension mismatch: expected {self.n_features}, got {X.shape[1]}")
        return nearest_centroid(X, self._centroids)

    def to_dict(self) -> Dict[str, Any]:
        info = {key: value for key, value in self._info.items() if isinstance(value, (int, float, str, list, bool))}
        ret = {
            "format_version": 1,
            "method": self._method,
            "config": self._config,
            "centroids": self._centroids.tolist(),
            "labels": self._labels.tolist(),
            "info": info
        }
        return ret

    @classmethod
    def from_dict(cls, dict_model: Dict[str, Any]) -> "ClusterModel":
        return cls(centroids=np.array(dict_model["centroids"], dtype=np.float64),
                   labels=np.array(dict_model["labels"], dtype=np.int64),
                   method=dict_model["method"], config=dict_model.get("config"), info=dict_model.get("info"))


def _validate_k(X: np.ndarray, k: int):
    if k < 1:
        raise ValueError(f"`k` must be positive: {k}")
    if k > X.shape[0]:
        raise ValueError(f"k must not exceed the number of samples: {k} > {X.shape[0]}")


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    k-means++ seeding: the next center is drawn with probability proportional to the squared
    distance to the closest chosen center.
    """
    n_samples = X.shape[0]
    lst_indices = [int(rng.integers(n_samples))]
    closest = pairwise_squared_distances(X, X[lst_indices])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0.0:
            r = rng.random() * total
            index = int(np.searchsorted(np.cumsum(closest), r, side="right"))
            index = min(index, n_samples - 1)
        else:
            # remaining points coincide with chosen centers (duplicates)
            remaining = np.setdiff1d(np.arange(n_samples), lst_indices)
            index = int(rng.choice(remaining))
        lst_indices.append(index)
        closest = np.minimum(closest, pairwise_squared_distances(X, X[[index]])[:, 0])
    return X[lst_indices].copy()


def repair_empty_clusters(X: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> int:
    """
    re-seeds every empty cluster at the point farthest from its current centroid.
    `centroids` and `labels` are updated in-place. returns the number of repaired clusters.
    """
    n_clusters = centroids.shape[0]
    empty = np.flatnonzero(np.bincount(labels, minlength=n_clusters) == 0)
    if len(empty) == 0:
        return 0

    diff = X - centroids[labels]
    distances = np.sum(diff * diff, axis=1)
    for cluster in empty:
        counts = np.bincount(labels, minlength=n_clusters)
        # never empty another cluster by stealing its only member.
        candidates = np.where(counts[labels] > 1, distances, -1.0)
        index = int(np.argmax(candidates))
        labels[index] = cluster
        centroids[cluster] = X[index]
        distances[index] = 0.0
    return len(empty)


def lloyd(X: np.ndarray, init_centroids: np.ndarray, max_iter: int = 300, tol: float = 1e-6) -> Dict[str, Any]:
    """
    single Lloyd run from the given initial centroids.

    @return: dict with centroids, labels, sse (final), sse_history (one entry per update step),
             n_iter and converged (exact fixed point or centroid shift <= tol).
    """
    n_clusters = init_centroids.shape[0]
    centroids = np.array(init_centroids, dtype=np.float64)
    labels = nearest_centroid(X, centroids)
    lst_sse = []
    converged = False
    n_repaired = 0

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        n_repaired += repair_empty_clusters(X, centroids, labels)
        new_centroids, _ = member_means(X, labels, n_clusters)
        lst_sse.append(within_cluster_sse(X, new_centroids, labels))
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids

        new_labels = nearest_centroid(X, centroids)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        if shift <= tol:
            # keep centroids equal to member means of the final labels
            n_repaired += repair_empty_clusters(X, centroids, labels)
            centroids, _ = member_means(X, labels, n_clusters)
            lst_sse.append(within_cluster_sse(X, centroids, labels))
            converged = True
            break
    else:
        n_repaired += repair_empty_clusters(X, centroids, labels)
        centroids, _ = member_means(X, labels, n_clusters)
        lst_sse.append(within_cluster_sse(X, centroids, labels))

    ret = {
        "centroids": centroids,
        "labels": labels,
        "sse": lst_sse[-1],
        "sse_history": lst_sse,
        "n_iter": n_iter,
        "converged": converged,
        "n_repaired": n_repaired
    }
    return ret


def kmeans_fit(X: np.ndarray, cfg: KMeansConfig) -> ClusterModel:
    """
    Lloyd iterations with k-means++ seeding, restarted `n_init` times.
    returns the run with the lowest within-cluster sum of squares (first run wins ties).
    """
    X = as_float_matrix(X, name="X")
    _validate_k(X, cfg.k)

    best = None
    lst_run_sse = []
    for run in range(cfg.n_init):
        rng = default_rng(cfg.seed, "kmeans", run)
        init_centroids = kmeans_plusplus(X, cfg.k, rng)
        result = lloyd(X, init_centroids, max_iter=cfg.max_iter, tol=cfg.tol)
        lst_run_sse.append(result["sse"])
        if (best is None) or (result["sse"] < best["sse"]):
            best = result

    if not best["converged"]:
        warnings.warn(f"k-means did not converge within max_iter={cfg.max_iter} (k={cfg.k}).")

    info = {
        "sse": best["sse"],
        "sse_history": best["sse_history"],
        "run_sse": lst_run_sse,
        "n_iter": best["n_iter"],
        "converged": best["converged"]
    }
    return ClusterModel(centroids=best["centroids"], labels=best["labels"], method="kmeans", config=asdict(cfg), info=info)


def ot_kmeans_fit(X: np.ndarray, cfg: OtKMeansConfig) -> ClusterModel:
    """
    K-means whose assignment step is a balanced entropic optimal transport problem between the
    empirical distribution (weights 1/m) and the clusters (weights 1/k). hard labels are the
    row-wise argmax of the transport plan; centroids are member means.
    stops when the hard labels repeat or the centroid shift falls below `tol`.
    """
    X = as_float_matrix(X, name="X")
    _validate_k(X, cfg.k)
    n_samples, n_clusters = X.shape[0], cfg.k

    rng = default_rng(cfg.seed, "ot_kmeans")
    centroids = kmeans_plusplus(X, n_clusters, rng)
    mu = np.full(n_samples, 1.0 / n_samples)
    nu = np.full(n_clusters, 1.0 / n_clusters)

    warmstart = None
    labels = None
    lst_sinkhorn_iter = []
    converged = False
    n_iter = 0
    for n_iter in range(1, cfg.outer_max_iter + 1):
        cost = pairwise_squared_distances(X, centroids)
        plan, dict_log = sinkhorn_log(cost, mu, nu, reg=cfg.reg, max_iter=cfg.sinkhorn_max_iter, tol=cfg.sinkhorn_tol,
                                      warmstart=warmstart, raise_on_failure=cfg.strict)
        lst_sinkhorn_iter.append(dict_log["n_iter"])
        if cfg.warmstart:
            warmstart = (dict_log["log_u"], dict_log["log_v"])

        new_labels = np.argmax(plan, axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            # centroids are already the member means of these labels
            converged = True
            break
        labels = new_labels
        repair_empty_clusters(X, centroids, labels)
        new_centroids, _ = member_means(X, labels, n_clusters)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift <= cfg.tol:
            converged = True
            break

    info = {
        "sse": within_cluster_sse(X, centroids, labels),
        "n_iter": n_iter,
        "sinkhorn_iterations": lst_sinkhorn_iter,
        "converged": converged
    }
    return ClusterModel(centroids=centroids, labels=labels, method="ot_kmeans", config=asdict(cfg), info=info)


def dbscan_fit(X: np.ndarray, cfg: DbscanConfig) -> ClusterModel:
    """
    density-based clustering (core points have >= min_samples neighbors within eps, self included).
    noise points are then folded into their nearest cluster so that every training point belongs
    to some cluster.
    """
    X = as_float_matrix(X, name="X")
    estimator = DBSCAN(eps=cfg.eps, min_samples=cfg.min_samples).fit(X)
    labels = np.asarray(estimator.labels_, dtype=np.int64).copy()
    n_clusters = int(labels.max()) + 1

    if n_clusters == 0:
        raise AllNoiseError(f"DBSCAN found no cluster (all points are noise) with eps={cfg.eps}, min_samples={cfg.min_samples}. increase eps or decrease min_samples.")

    is_noise = labels == -1
    n_noise = int(is_noise.sum())
    centroids, _ = member_means(X[~is_noise], labels[~is_noise], n_clusters)
    if n_noise > 0:
        labels[is_noise] = nearest_centroid(X[is_noise], centroids)
        centroids, _ = member_means(X, labels, n_clusters)

    info = {
        "n_core": int(len(estimator.core_sample_indices_)),
        "n_noise_relabeled": n_noise
    }
    return ClusterModel(centroids=centroids, labels=labels, method="dbscan", config=asdict(cfg), info=info)


def meanshift_fit(X: np.ndarray, cfg: MeanShiftConfig, chunk_size: int = 512) -> ClusterModel:
    """
    flat-kernel mean shift. every point climbs to the mean of the training points within
    `bandwidth` until its shift falls below 1e-6 * bandwidth. modes closer than bandwidth/2 are
    merged, points are labeled by the nearest mode and centroids are recomputed as member means.
    """
    X = as_float_matrix(X, name="X")
    bandwidth = cfg.bandwidth
    bandwidth_sq = bandwidth * bandwidth
    stop_threshold = 1e-6 * bandwidth

    positions = X.copy()
    is_active = np.ones(X.shape[0], dtype=bool)
    n_iter = 0
    for n_iter in range(1, cfg.max_iter + 1):
        active = np.flatnonzero(is_active)
        if len(active) == 0:
            break
        for begin in range(0, len(active), chunk_size):
            rows = active[begin:begin + chunk_size]
            window = (pairwise_squared_distances(positions[rows], X) <= bandwidth_sq).astype(np.float64)
            counts = window.sum(axis=1)
            has_members = counts > 0
            new_positions = positions[rows].copy()
            new_positions[has_members] = (window[has_members] @ X) / counts[has_members, None]
            shift = np.linalg.norm(new_positions - positions[rows], axis=1)
            positions[rows] = new_positions
            is_active[rows[(shift < stop_threshold) | (~has_members)]] = False

    # merge modes in index order
    lst_modes: List[np.ndarray] = []
    merge_radius = bandwidth / 2.0
    for position in positions:
        if len(lst_modes) > 0:
            distances = np.linalg.norm(np.stack(lst_modes) - position, axis=1)
            if distances.min() < merge_radius:
                continue
        lst_modes.append(position)
    modes = np.stack(lst_modes)

    labels = nearest_centroid(X, modes)
    # drop modes without members and renumber in mode order
    used = np.unique(labels)
    remap = np.full(modes.shape[0], -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    labels = remap[labels]
    centroids, _ = member_means(X, labels, len(used))

    info = {
        "n_iter": n_iter,
        "n_modes": int(modes.shape[0]),
        "converged": bool(not is_active.any())
    }
    return ClusterModel(centroids=centroids, labels=labels, method="meanshift", config=asdict(cfg), info=info)


def fit_clusterer(X: np.ndarray, cfg: ClusterConfig) -> ClusterModel:
    method = config_to_method(cfg)
    if method == "kmeans":
        return kmeans_fit(X, cfg)
    elif method == "ot_kmeans":
        return ot_kmeans_fit(X, cfg)
    elif method == "dbscan":
        return dbscan_fit(X, cfg)
    elif method == "meanshift":
        return meanshift_fit(X, cfg)
    raise ValueError(f"unknown clustering method: {method}")
