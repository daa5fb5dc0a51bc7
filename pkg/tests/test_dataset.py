#!/usr/bin/env python
# -*- coding:utf-8 -*-

import numpy as np
import pytest

from dataset import Dataset, load_csv, save_csv, DatasetFormatError, SyntheticConfig, generate_synthetic
from dataset import SplitSpec, split, StandardScaler, fit_scaler, apply_scaler
from dataset.synthetic import _embed_loads
from dataset.utils import derive_seed
from evaluator import rmse, silhouette
from model.clustering import KMeansConfig, kmeans_fit
from model.regressor import KnnConfig, knn_fit


def test_dataset_rejects_row_mismatch():
    with pytest.raises(ValueError):
        Dataset(features=np.zeros((3, 2)), targets=np.zeros((2, 1)))


def test_dataset_rejects_non_finite():
    with pytest.raises(ValueError):
        Dataset(features=[[0.0, np.nan]], targets=[[1.0]])


def test_dataset_is_immutable():
    ds = Dataset(features=np.ones((2, 2)), targets=np.ones((2, 1)))
    with pytest.raises(ValueError):
        ds.features[0, 0] = 5.0


def test_split_sizes_and_partition():
    ds = Dataset(features=np.arange(10.0).reshape(-1, 1), targets=np.arange(10.0).reshape(-1, 1))
    trainset, testset = split(ds, SplitSpec(train_fraction=0.8, seed=1))
    assert (trainset.n_samples, testset.n_samples) == (8, 2)
    merged = np.sort(np.concatenate([trainset.features[:, 0], testset.features[:, 0]]))
    np.testing.assert_array_equal(merged, np.arange(10.0))


def test_split_is_deterministic():
    ds = Dataset(features=np.arange(20.0).reshape(-1, 2), targets=np.arange(10.0).reshape(-1, 1))
    train_a, _ = split(ds, SplitSpec(train_fraction=0.5, seed=4))
    train_b, _ = split(ds, SplitSpec(train_fraction=0.5, seed=4))
    np.testing.assert_array_equal(train_a.features, train_b.features)


def test_split_rejects_empty_partition():
    ds = Dataset(features=np.zeros((3, 1)) + np.arange(3.0).reshape(-1, 1), targets=np.zeros((3, 1)))
    with pytest.raises(ValueError):
        split(ds, SplitSpec(train_fraction=0.1, seed=0))


def test_scaler_standardizes_trainset():
    X = np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 60.0]])
    scaler = StandardScaler.fit(X)
    Z = scaler.transform(X)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(Z.std(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(scaler.inverse_transform(Z), X, atol=1e-12)


def test_scaler_rejects_zero_variance():
    with pytest.raises(ValueError, match="column index \\[1\\]"):
        StandardScaler.fit(np.array([[1.0, 5.0], [2.0, 5.0]]))


def test_apply_scaler_keeps_targets():
    ds = Dataset(features=[[1.0], [3.0]], targets=[[100.0], [200.0]])
    scaled = apply_scaler(fit_scaler(ds), ds)
    np.testing.assert_array_equal(scaled.targets, ds.targets)
    np.testing.assert_allclose(scaled.features[:, 0], [-1.0, 1.0])


def test_csv_roundtrip_is_exact(tmp_path, small_synthetic):
    path = str(tmp_path / "data.csv")
    save_csv(small_synthetic, path)
    loaded = load_csv(path, n_targets=3)
    np.testing.assert_array_equal(loaded.features, small_synthetic.features)
    np.testing.assert_array_equal(loaded.targets, small_synthetic.targets)
    assert loaded.target_names == small_synthetic.target_names


def test_csv_reports_line_of_bad_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,y\n1,2,3\n4,oops,6\n")
    with pytest.raises(DatasetFormatError) as e:
        load_csv(str(path), n_targets=1)
    assert e.value.line_number == 3


def test_csv_rejects_field_count_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,y\n1,2,3\n4,5\n")
    with pytest.raises(DatasetFormatError):
        load_csv(str(path), n_targets=1)


def test_csv_requires_feature_column(tmp_path):
    path = tmp_path / "only_targets.csv"
    path.write_text("y1,y2\n1,2\n")
    with pytest.raises(ValueError):
        load_csv(str(path), n_targets=2)


def test_csv_missing_file():
    with pytest.raises(IOError):
        load_csv("/nonexistent/data.csv", n_targets=1)


def test_synthetic_shapes_and_ranges():
    cfg = SyntheticConfig(n_samples=500, n_components=4, d=4, L=3, seed=11)
    ds = generate_synthetic(cfg)
    assert (ds.n_samples, ds.n_features, ds.n_targets) == (500, 4, 3)
    assert ds.targets.min() >= 0.0 and ds.targets.max() < 1000.0


def test_synthetic_is_pure_function_of_config():
    cfg = SyntheticConfig(n_samples=300, seed=5)
    a, b = generate_synthetic(cfg), generate_synthetic(cfg)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.targets, b.targets)
    c = generate_synthetic(SyntheticConfig(n_samples=300, seed=6))
    assert not np.array_equal(a.features, c.features)


def test_synthetic_config_validation():
    with pytest.raises(ValueError):
        SyntheticConfig(n_samples=0)
    with pytest.raises(ValueError):
        SyntheticConfig(load_range=(5.0, 1.0))
    with pytest.raises(ValueError):
        SyntheticConfig(d=2, L=3)
    with pytest.raises(ValueError):
        SyntheticConfig(component_scale=0.0)


def test_synthetic_config_dict_roundtrip():
    cfg = SyntheticConfig(n_samples=123, noise_std=0.2, seed=9)
    assert SyntheticConfig.from_dict(cfg.to_dict()) == cfg


def test_derive_seed_is_stable_and_key_sensitive():
    assert derive_seed(0, "kmeans+gb", 5) == derive_seed(0, "kmeans+gb", 5)
    assert derive_seed(0, "kmeans+gb", 5) != derive_seed(0, "kmeans+gb", 10)
    assert derive_seed(0, "kmeans+gb", 5) != derive_seed(1, "kmeans+gb", 5)


def test_split_of_a_million_rows():
    ds = Dataset(features=np.zeros((1000000, 1)), targets=np.zeros((1000000, 1)))
    trainset, testset = split(ds, SplitSpec(train_fraction=0.8, seed=0))
    assert (trainset.n_samples, testset.n_samples) == (800000, 200000)


def test_load_embedding_is_strictly_increasing():
    u = np.linspace(0.0, 1.0, 10001).reshape(-1, 1)
    embedded = _embed_loads(u)[:, 0]
    assert np.all(np.diff(embedded) > 0.0)
    assert embedded[0] == 0.0
    assert embedded[-1] == pytest.approx(1.0 + 0.12 / np.pi)


def test_noiseless_single_component_is_a_function_of_the_loads():
    ds = generate_synthetic(SyntheticConfig(n_samples=500, n_components=1, d=4, L=3, noise_std=0.0, seed=2))
    regressor = knn_fit(ds.features, ds.targets, KnnConfig(n_neighbors=1))
    assert rmse(ds.targets, regressor.predict_matrix(ds.features)) == 0.0


def test_separated_components_give_high_silhouette():
    ds = generate_synthetic(SyntheticConfig(n_samples=2000, n_components=4, d=4, L=3, seed=0))
    model = kmeans_fit(ds.features, KMeansConfig(k=4, seed=0))
    assert silhouette(ds.features, model.labels) > 0.5
