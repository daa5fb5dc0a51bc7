#!/usr/bin/env python
# -*- coding:utf-8 -*-

from typing import Optional

import numpy as np
from sklearn.metrics import silhouette_score

from dataset.utils import as_float_matrix, derive_seed


def silhouette(X: np.ndarray, labels: np.ndarray, sample_size: Optional[int] = None, seed: int = 0) -> float:
    """
    mean silhouette coefficient with euclidean distance. singleton clusters contribute zero.

    @param X: features, shape (m, d)
    @param labels: cluster index of each row.
    @param sample_size: score a seeded subsample of this size instead of all rows.
    @param seed: seed of the subsample.
    """
    X = as_float_matrix(X, name="X")
    labels = np.asarray(labels).reshape(-1)
    if labels.shape[0] != X.shape[0]:
        raise ValueError(f"labels length {labels.shape[0]} differs from number of samples {X.shape[0]}")
    n_clusters = len(np.unique(labels))
    if n_clusters < 2:
        raise ValueError(f"silhouette requires at least 2 clusters: {n_clusters}")
    if n_clusters >= X.shape[0]:
        # every point is a singleton
        return 0.0

    if (sample_size is not None) and (sample_size < X.shape[0]):
        if sample_size < 2:
            raise ValueError(f"`sample_size` must be at least 2: {sample_size}")
        random_state = derive_seed(seed, "silhouette")
        score = silhouette_score(X, labels, metric="euclidean", sample_size=sample_size, random_state=random_state)
    else:
        score = silhouette_score(X, labels, metric="euclidean")
    return float(np.clip(score, -1.0, 1.0))
