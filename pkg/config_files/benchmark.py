#!/usr/bin/env python
# -*- coding:utf-8 -*-

# default hyperparameters of the clusterers and regressors, and the method lists of the benchmark grid.
# a method id is "<clusterer>+<regressor>", e.g. "kmeans+knn5" or "ot_kmeans+gb_per_load".

from typing import Dict, Any, List, Tuple

cfg_clusterer_defaults = {
    "kmeans": {
        "n_init": 10,
        "max_iter": 300,
        "tol": 1e-6
    },
    "ot_kmeans": {
        "reg": 0.1,
        "sinkhorn_max_iter": 1000,
        "sinkhorn_tol": 1e-6,
        "outer_max_iter": 100,
        "tol": 1e-6,
        "warmstart": True,
        # plan marginals within 1e-6 max absolute deviation.
        # non-converged sinkhorn solves warn and keep the last plan
        "strict": False
    },
    "dbscan": {
        "min_samples": 5
    },
    "meanshift": {
        "max_iter": 300
    }
}

cfg_gb = {
    "n_estimators": 500,
    "learning_rate": 0.3,
    "max_depth": 7,
    "min_samples_leaf": 1
}

# per_load=False: one multi-output regressor per cluster. otherwise one regressor per load.
cfg_regressor_defaults = {
    "gb": {"kind": "gb", "per_load": False, "params": cfg_gb},
    "gb_per_load": {"kind": "gb", "per_load": True, "params": cfg_gb},
    "knn3": {"kind": "knn", "per_load": True, "params": {"n_neighbors": 3}},
    "knn5": {"kind": "knn", "per_load": True, "params": {"n_neighbors": 5}},
    "knn9": {"kind": "knn", "per_load": True, "params": {"n_neighbors": 9}},
    "ols": {"kind": "ols", "per_load": True, "params": {}},
    "lasso": {"kind": "lasso", "per_load": True, "params": {"lam": 0.01, "max_iter": 10000, "tol": 1e-8}},
    "linsvr": {"kind": "linsvr", "per_load": True, "params": {"C": 1.0, "epsilon": 0.1, "n_epochs": 50, "batch_size": 256, "eta0": 0.5}}
}

DEFAULT_METHODS = [
    "kmeans+gb",
    "kmeans+knn3",
    "kmeans+knn5",
    "kmeans+knn9",
    "ot_kmeans+gb",
    "ot_kmeans+gb_per_load",
    "ot_kmeans+knn5"
]

VALIDATION_METHODS = [
    "dbscan+gb",
    "dbscan+knn5",
    "meanshift+gb",
    "meanshift+knn5",
    "ot_kmeans+ols",
    "ot_kmeans+lasso",
    "ot_kmeans+linsvr"
]

BASELINE_PREFIX = "baseline"

cfg_synthetic_defaults = {
    "n_samples": 20000,
    "n_components": 4,
    "d": 4,
    "L": 3,
    "noise_std": 0.01,
    "load_range": [0.0, 1000.0],
    "component_separation": 4.0,
    "component_scale": 2.0,
    "seed": 0
}

cfg_grid_defaults = {
    "cluster_sizes": list(range(5, 201, 5)),
    "methods": DEFAULT_METHODS,
    "rui_weights": [0.3, 0.4, 0.3],
    "data_path": None,
    "n_targets": 3,
    "synthetic": cfg_synthetic_defaults,
    "train_fraction": 0.8,
    "seed": 0,
    "threads": 1,
    "subsample_silhouette": None,
    # grid axes of the clusterers that discover the number of clusters themselves.
    "eps_values": [0.2, 0.3, 0.4, 0.5, 0.75, 1.0],
    "bandwidth_values": [0.5, 0.75, 1.0, 1.5, 2.0],
    "clusterer_params": {},
    "regressor_params": {},
    "include_baselines": True
}


def parse_method_id(method_id: str) -> Tuple[str, str]:
    """splits "<clusterer>+<regressor>" into its parts."""
    parts = method_id.split("+")
    if len(parts) != 2 or not all(parts):
        raise ValueError(f"invalid method id: `{method_id}`. expected `<clusterer>+<regressor>`.")
    clusterer, regressor = parts
    if clusterer != BASELINE_PREFIX and clusterer not in cfg_clusterer_defaults:
        raise ValueError(f"unknown clusterer `{clusterer}` in method id `{method_id}`. available: {list(cfg_clusterer_defaults.keys())}")
    if regressor not in cfg_regressor_defaults:
        raise ValueError(f"unknown regressor `{regressor}` in method id `{method_id}`. available: {list(cfg_regressor_defaults.keys())}")
    return clusterer, regressor


def baseline_method_id(regressor: str) -> str:
    return f"{BASELINE_PREFIX}+{regressor}"


def distinct_regressors(methods: List[str]) -> List[str]:
    lst_regressors = []
    for method_id in methods:
        _, regressor = parse_method_id(method_id)
        if regressor not in lst_regressors:
            lst_regressors.append(regressor)
    return lst_regressors
