#!/usr/bin/env python
# -*- coding:utf-8 -*-

from typing import Iterator, Tuple

import numpy as np

DEFAULT_CHUNK_ELEMENTS = 4_000_000


def _row_chunks(n_rows: int, n_cols: int, n_dim: int, max_elements: int = DEFAULT_CHUNK_ELEMENTS) -> Iterator[Tuple[int, int]]:
    chunk_size = max(1, max_elements // max(1, n_cols * n_dim))
    for begin in range(0, n_rows, chunk_size):
        yield begin, min(begin + chunk_size, n_rows)


def pairwise_squared_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """
    squared euclidean distances computed from explicit differences, row chunk by row chunk.
    a row of the output depends only on the corresponding row of X.

    @param X: shape: (n, d)
    @param C: shape: (k, d)
    @return: shape: (n, k)
    """
    n, k = X.shape[0], C.shape[0]
    ret = np.empty((n, k), dtype=np.float64)
    for begin, end in _row_chunks(n, k, X.shape[1]):
        diff = X[begin:end, None, :] - C[None, :, :]
        ret[begin:end] = np.sum(diff * diff, axis=-1)
    return ret


def pairwise_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return np.sqrt(pairwise_squared_distances(X, C))


def nearest_centroid(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """argmin of squared distance; ties go to the lowest centroid index."""
    labels = np.empty(X.shape[0], dtype=np.int64)
    for begin, end in _row_chunks(X.shape[0], centroids.shape[0], X.shape[1]):
        labels[begin:end] = np.argmin(pairwise_squared_distances(X[begin:end], centroids), axis=1)
    return labels


def member_means(X: np.ndarray, labels: np.ndarray, n_clusters: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    per-cluster mean of members.

    @return: (means, counts). rows of empty clusters are NaN.
    """
    counts = np.bincount(labels, minlength=n_clusters)
    sums = np.zeros((n_clusters, X.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, X)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / counts[:, None]
    return means, counts


def within_cluster_sse(X: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    diff = X - centroids[labels]
    return float(np.sum(diff * diff))
