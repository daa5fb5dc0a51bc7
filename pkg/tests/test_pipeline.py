#!/usr/bin/env python
# -*- coding:utf-8 -*-

import numpy as np
import pytest

from dataset import Dataset, fit_scaler, apply_scaler
from model.clustering import KMeansConfig, DbscanConfig, ClusterModel
from model.regressor import RegressorSpec, predict_regressor_set
from pipeline import train_divide_conquer, assign_to_cluster, predict_sample, predict_batch, save_pipeline, load_pipeline, ClusterSizeError

_SPECS = [
    RegressorSpec(name="knn5", kind="knn", params={"n_neighbors": 5}),
    RegressorSpec(name="gb", kind="gb", params={"n_estimators": 20, "max_depth": 3}, per_load=False),
    RegressorSpec(name="gb_per_load", kind="gb", params={"n_estimators": 20, "max_depth": 3}),
    RegressorSpec(name="ols", kind="ols"),
    RegressorSpec(name="lasso", kind="lasso", params={"lam": 0.01}),
    RegressorSpec(name="linsvr", kind="linsvr", params={"n_epochs": 5})
]


@pytest.mark.parametrize("spec", _SPECS, ids=lambda spec: spec.name)
def test_single_cluster_reproduces_global_regressor(small_synthetic, spec):
    X, Y = small_synthetic.features, small_synthetic.targets
    pipeline = train_divide_conquer(small_synthetic, KMeansConfig(k=1), spec, seed=17)
    baseline = spec.fit(X, Y, seed=17)

    queries = X[:50] + 0.01
    predictions, _ = predict_batch(queries, pipeline)
    np.testing.assert_array_equal(predictions, predict_regressor_set(baseline, queries))


def test_piecewise_linear_targets_are_recovered(two_blobs):
    s = two_blobs.sum(axis=1)
    y = np.where(np.arange(100) < 50, 3.0 * s + 1.0, -2.0 * s + 50.0)
    trainset = Dataset(two_blobs, y)
    spec = RegressorSpec(name="ols", kind="ols")

    clustered = train_divide_conquer(trainset, KMeansConfig(k=2), spec)
    single = train_divide_conquer(trainset, KMeansConfig(k=1), spec)
    rmse_clustered = np.sqrt(np.mean((predict_batch(two_blobs, clustered)[0][:, 0] - y) ** 2))
    rmse_single = np.sqrt(np.mean((predict_batch(two_blobs, single)[0][:, 0] - y) ** 2))
    assert rmse_clustered < 0.01 * rmse_single


def test_cluster_sample_counts(small_synthetic):
    pipeline = train_divide_conquer(small_synthetic, KMeansConfig(k=4, seed=1), RegressorSpec(name="ols", kind="ols"))
    assert sum(pipeline.cluster_sample_counts) == small_synthetic.n_samples
    assert pipeline.n_clusters == 4 and len(pipeline.banks) == 4
    assert all(len(bank) == small_synthetic.n_targets for bank in pipeline.banks)


def test_assign_to_cluster_boundaries():
    cluster_model = ClusterModel(centroids=[[0.0], [10.0]], labels=[0, 1], method="kmeans")
    assert assign_to_cluster(np.array([4.9]), cluster_model) == 0
    assert assign_to_cluster(np.array([5.1]), cluster_model) == 1
    assert assign_to_cluster(np.array([5.0]), cluster_model) == 0
    with pytest.raises(ValueError):
        assign_to_cluster(np.array([1.0, 2.0]), cluster_model)


def test_assign_to_cluster_labels_training_points(two_blobs):
    pipeline = train_divide_conquer(Dataset(two_blobs, two_blobs[:, 0]), KMeansConfig(k=2), RegressorSpec(name="ols", kind="ols"))
    for x, label in zip(two_blobs, pipeline.cluster_model.labels):
        assert assign_to_cluster(x, pipeline.cluster_model) == label


def test_predict_sample_matches_batch(small_synthetic):
    spec = RegressorSpec(name="knn3", kind="knn", params={"n_neighbors": 3})
    pipeline = train_divide_conquer(small_synthetic, KMeansConfig(k=3, seed=2), spec)
    queries = small_synthetic.features[::7] * 1.01
    predictions, elapsed = predict_batch(queries, pipeline)
    assert elapsed >= 0.0
    for x, row in zip(queries, predictions):
        prediction = predict_sample(x, pipeline)
        np.testing.assert_array_equal(prediction.values, row)
        assert prediction.assigned_cluster == assign_to_cluster(x, pipeline.cluster_model)


def test_predict_batch_empty_and_mismatch(small_synthetic):
    pipeline = train_divide_conquer(small_synthetic, KMeansConfig(k=2), RegressorSpec(name="ols", kind="ols"))
    predictions, _ = predict_batch(np.empty((0, small_synthetic.n_features)), pipeline)
    assert predictions.shape == (0, small_synthetic.n_targets)
    with pytest.raises(ValueError):
        predict_batch(np.zeros((3, small_synthetic.n_features + 1)), pipeline)
    with pytest.raises(ValueError):
        predict_batch(np.zeros((3, small_synthetic.n_features)), pipeline, n_repeats=0)


def test_small_cluster_is_rejected(rng):
    X = np.vstack([rng.normal(size=(9, 2)), [[50.0, 50.0]]])
    cluster_model = ClusterModel(centroids=[[0.0, 0.0], [50.0, 50.0]], labels=[0] * 9 + [1], method="kmeans")
    spec = RegressorSpec(name="knn3", kind="knn", params={"n_neighbors": 3})
    with pytest.raises(ClusterSizeError) as excinfo:
        train_divide_conquer(Dataset(X, X[:, 0]), KMeansConfig(k=2), spec, cluster_model=cluster_model)
    assert excinfo.value.cluster_index == 1
    assert excinfo.value.cluster_size == 1
    assert excinfo.value.minimum == 3


def test_load_count_mismatch(small_synthetic):
    with pytest.raises(ValueError):
        train_divide_conquer(small_synthetic, KMeansConfig(k=2), RegressorSpec(name="ols", kind="ols"), n_targets=5)


def test_density_clusterer(two_blobs):
    trainset = Dataset(two_blobs, np.stack([two_blobs[:, 0], two_blobs[:, 1]], axis=1))
    pipeline = train_divide_conquer(trainset, DbscanConfig(eps=0.3, min_samples=4), RegressorSpec(name="ols", kind="ols"))
    assert pipeline.n_clusters == 2
    predictions, _ = predict_batch(two_blobs, pipeline)
    np.testing.assert_allclose(predictions, trainset.targets, atol=1e-8)


def test_thread_count_does_not_change_results(small_synthetic):
    spec = RegressorSpec(name="gb", kind="gb", params={"n_estimators": 10, "max_depth": 3}, per_load=False)
    a = train_divide_conquer(small_synthetic, KMeansConfig(k=3), spec, seed=5, n_jobs=1)
    b = train_divide_conquer(small_synthetic, KMeansConfig(k=3), spec, seed=5, n_jobs=3)
    np.testing.assert_array_equal(predict_batch(small_synthetic.features, a)[0], predict_batch(small_synthetic.features, b)[0])


def test_save_and_load(tmp_path, small_synthetic):
    scaler = fit_scaler(small_synthetic)
    trainset = apply_scaler(scaler, small_synthetic)
    spec = RegressorSpec(name="gb_per_load", kind="gb", params={"n_estimators": 10, "max_depth": 3})
    pipeline = train_divide_conquer(trainset, KMeansConfig(k=3), spec, seed=1, scaler=scaler)

    save_pipeline(pipeline, str(tmp_path / "model"))
    restored = load_pipeline(str(tmp_path / "model"))
    assert restored.n_clusters == 3
    assert restored.regressor_spec == spec
    assert restored.cluster_sample_counts == pipeline.cluster_sample_counts
    np.testing.assert_array_equal(restored.scaler.means, scaler.means)
    np.testing.assert_array_equal(predict_batch(trainset.features, restored)[0], predict_batch(trainset.features, pipeline)[0])


def test_load_missing_directory(tmp_path):
    with pytest.raises(IOError):
        load_pipeline(str(tmp_path / "missing"))
