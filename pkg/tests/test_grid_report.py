#!/usr/bin/env python
# -*- coding:utf-8 -*-

import os
import json

import numpy as np
import pandas as pd
import pytest

from benchmark import ExperimentRecord, GridConfig, run_grid, save_records, load_records, report, write_report
from benchmark.grid import enumerate_cells, prepare_datasets, STATUS_FAILED
from benchmark.report import MAXIMUM_DIFFERENCE, REPORT_CONTEXT_FILE, format_report, save_report_context, report_from_directory

_SYNTHETIC = {"n_samples": 300, "n_components": 3, "d": 4, "L": 3, "seed": 1}


def _grid_config(**kwargs) -> GridConfig:
    params = {"cluster_sizes": [2, 4], "methods": ["kmeans+ols", "kmeans+knn3"], "synthetic": dict(_SYNTHETIC), "seed": 3}
    params.update(kwargs)
    return GridConfig(**params)


def test_enumerate_cells():
    cfg = _grid_config(methods=["kmeans+ols", "ot_kmeans+ols", "dbscan+knn3"], eps_values=[0.5, 1.0])
    cells = enumerate_cells(cfg)
    assert [cell.method for cell in cells[:2]] == ["baseline+ols", "baseline+knn3"]
    assert len(cells) == 2 + 2 + 2 + 2
    assert [cell.grid_value for cell in cells if cell.clusterer == "dbscan"] == [0.5, 1.0]
    assert len({cell.seed for cell in cells}) == len(cells)
    assert [cell.seed for cell in enumerate_cells(cfg)] == [cell.seed for cell in cells]


def test_grid_config_validation():
    with pytest.raises(ValueError):
        _grid_config(cluster_sizes=[4, 2])
    with pytest.raises(ValueError):
        _grid_config(methods=["baseline+ols"])
    with pytest.raises(ValueError):
        _grid_config(methods=["kmeans+forest"])
    with pytest.raises(ValueError):
        _grid_config(rui_weights=[0.5, 0.6, 0.1])
    with pytest.raises(ValueError):
        GridConfig.from_dict({"cluster_size": [5]})


def test_run_grid_records():
    records = run_grid(_grid_config(), verbose=False)
    assert [(record.method, record.cluster_size) for record in records] == [
        ("baseline+ols", 0), ("baseline+knn3", 0),
        ("kmeans+ols", 2), ("kmeans+ols", 4), ("kmeans+knn3", 2), ("kmeans+knn3", 4)]
    assert all(record.is_ok for record in records)
    for record in records:
        assert record.rmse >= 0.0 and record.r2 <= 1.0
        assert len(record.rmse_per_load) == 3
        if record.is_baseline:
            assert record.silhouette is None
        else:
            assert -1.0 <= record.silhouette <= 1.0


def test_run_grid_is_deterministic_across_thread_counts():
    cfg = _grid_config()
    datasets = prepare_datasets(cfg)
    serial = run_grid(cfg, verbose=False, datasets=datasets)
    with pytest.warns(UserWarning):
        concurrent = run_grid(_grid_config(threads=2), verbose=False, datasets=datasets)
    assert [record.result_fields() for record in serial] == [record.result_fields() for record in concurrent]


def test_failed_cells_are_recorded():
    records = run_grid(_grid_config(cluster_sizes=[2, 1000], methods=["kmeans+ols"]), verbose=False)
    failed = [record for record in records if not record.is_ok]
    assert len(failed) == 1
    assert failed[0].status == STATUS_FAILED
    assert failed[0].cluster_size == 1000
    assert failed[0].reason.startswith("ValueError")
    assert failed[0].rmse is None


def test_records_csv_roundtrip(tmp_path):
    records = run_grid(_grid_config(cluster_sizes=[2, 1000], methods=["kmeans+ols"]), verbose=False)
    path = str(tmp_path / "records.csv")
    save_records(records, path)
    assert load_records(path) == records
    assert list(pd.read_csv(path).columns[:10]) == ["method", "cluster_size", "rmse", "r2", "silhouette", "train_s", "pred_s", "seed", "status", "reason"]


def _record(method, cluster_size, rmse, r2, silhouette, train_s, pred_s):
    return ExperimentRecord(method=method, cluster_size=cluster_size, rmse=rmse, r2=r2, silhouette=silhouette,
                            train_s=train_s, pred_s=pred_s, rmse_per_load=[rmse], grid_value=cluster_size)


@pytest.fixture
def hand_records():
    return [
        _record("baseline+gb", 0, 10.0, 0.5, None, 1.0, 0.10),
        _record("kmeans+gb", 5, 8.0, 0.6, 0.6, 2.0, 0.05),
        _record("kmeans+gb", 10, 9.0, 0.55, 0.5, 3.0, 0.06),
        _record("ot_kmeans+gb", 5, 11.0, 0.4, 0.4, 4.0, 0.07),
        _record("ot_kmeans+gb", 10, 12.0, 0.3, 0.3, 5.0, 0.08)
    ]


def test_best_rmse_table(hand_records):
    df = report(hand_records).best_rmse
    assert df["method"].tolist() == ["baseline+gb", "kmeans+gb", "ot_kmeans+gb", MAXIMUM_DIFFERENCE]
    difference = df.iloc[-1]
    assert difference["cluster_size"] == 5
    assert difference["rmse"] == pytest.approx(-20.0)
    assert difference["r2"] == pytest.approx(0.1)
    assert difference["train_s"] == pytest.approx(1.0)
    assert difference["pred_s"] == pytest.approx(-0.05)


def test_dominating_method_tops_rui_tables(hand_records):
    bundle = report(hand_records)
    assert len(bundle.rui_scores) == 4
    assert bundle.header["global_rui_best"] == {"method": "kmeans+gb", "cluster_size": 5, "rui": pytest.approx(1.0)}
    maxima = bundle.rui_local_maxima
    assert maxima["method"].tolist() == ["kmeans+gb", "ot_kmeans+gb"]
    assert maxima["cluster_size"].tolist() == [5, 5]
    assert maxima.loc[maxima["global_optimum"], "method"].tolist() == ["kmeans+gb"]


def test_metric_curves_place_baseline_at_zero(hand_records):
    curve = report(hand_records).curves["rmse"]
    assert curve.index.tolist() == [0, 5, 10]
    assert curve.loc[0].tolist() == [10.0, 10.0]
    assert curve["kmeans+gb"].tolist() == [10.0, 8.0, 9.0]


def test_write_report(tmp_path, hand_records):
    records = hand_records + [ExperimentRecord(method="kmeans+gb", cluster_size=50, status=STATUS_FAILED, reason="ClusterSizeError: too small", grid_value=50)]
    bundle = report(records, rmse_upper_bound=15.0)
    paths = write_report(bundle, str(tmp_path))
    for name in ["best_rmse.csv", "rui_scores.csv", "rui_local_maxima.csv", "report.txt", "summary.json",
                 os.path.join("curves", "rmse.csv"), os.path.join("figures", "rmse.svg"), os.path.join("figures", "rui.svg")]:
        assert os.path.join(str(tmp_path), name) in paths
        assert os.path.exists(os.path.join(str(tmp_path), name))

    with open(os.path.join(str(tmp_path), "summary.json")) as ifs:
        summary = json.load(ifs)
    assert summary["n_failed"] == 1
    assert summary["rmse_upper_bound"] == 15.0
    with open(os.path.join(str(tmp_path), "report.txt")) as ifs:
        text = ifs.read()
    assert "ClusterSizeError" in text
    with open(os.path.join(str(tmp_path), "figures", "rmse.svg")) as ifs:
        assert ifs.read().startswith("<svg")


def test_report_without_usable_records():
    with pytest.raises(ValueError):
        report([])
    with pytest.raises(ValueError):
        report([ExperimentRecord(method="kmeans+gb", cluster_size=5, status=STATUS_FAILED, reason="x")])


def _dbscan_record(eps, cluster_size, rmse, silhouette, pred_s):
    return ExperimentRecord(method="dbscan+gb", cluster_size=cluster_size, rmse=rmse, r2=0.5, silhouette=silhouette,
                            train_s=1.0, pred_s=pred_s, rmse_per_load=[rmse], grid_value=eps)


def test_density_methods_are_indexed_by_their_parameter(hand_records):
    records = hand_records + [_dbscan_record(0.5, 2, 9.5, 0.45, 0.04), _dbscan_record(1.0, 2, 9.0, 0.55, 0.05),
                              _dbscan_record(2.0, 3, 8.5, 0.35, 0.06)]
    bundle = report(records)
    curve = bundle.curves["rmse_by_eps"]
    assert curve.index.name == "eps"
    assert curve.index.tolist() == [0.5, 1.0, 2.0]
    assert curve["dbscan+gb"].tolist() == [9.5, 9.0, 8.5]
    assert bundle.curves["cluster_size_by_eps"]["dbscan+gb"].tolist() == [2, 2, 3]
    assert "dbscan+gb" not in bundle.curves["rmse"].columns
    assert bundle.curves["rui_by_eps"]["dbscan+gb"].notna().all()
    assert "rmse_by_eps" in bundle.figures
    maxima = bundle.rui_local_maxima.set_index("method")
    assert maxima.loc["dbscan+gb", "grid_value"] in (0.5, 1.0, 2.0)


def test_report_context_roundtrip(tmp_path):
    path = save_report_context(str(tmp_path), [0.2, 0.5, 0.3], rmse_upper_bound=288.5, contended=True)
    assert path == os.path.join(str(tmp_path), REPORT_CONTEXT_FILE)
    with open(path) as ifs:
        assert json.load(ifs) == {"rui_weights": [0.2, 0.5, 0.3], "rmse_upper_bound": 288.5, "contended": True}


def test_report_regenerated_from_saved_records(tmp_path):
    cfg = _grid_config(cluster_sizes=[2, 4, 1000], rui_weights=[0.2, 0.5, 0.3])
    records = run_grid(cfg, verbose=False)
    save_records(records, str(tmp_path / "records.csv"))
    save_report_context(str(tmp_path), cfg.rui_weights, rmse_upper_bound=123.25, contended=True)

    original = report(records, rui_weights=cfg.rui_weights, rmse_upper_bound=123.25, contended=True)
    regenerated = report_from_directory(str(tmp_path))
    pd.testing.assert_frame_equal(regenerated.best_rmse, original.best_rmse)
    pd.testing.assert_frame_equal(regenerated.rui_scores, original.rui_scores)
    pd.testing.assert_frame_equal(regenerated.rui_local_maxima, original.rui_local_maxima)
    assert list(regenerated.curves) == list(original.curves)
    for name, curve in original.curves.items():
        pd.testing.assert_frame_equal(regenerated.curves[name], curve)
    assert regenerated.figures == original.figures
    assert regenerated.header == original.header
    assert format_report(regenerated) == format_report(original)


def test_clustering_helps_capacity_limited_boosting():
    # shallow, short boosting cannot fit every component at once; one model per cluster can.
    cfg = GridConfig(cluster_sizes=[5, 10, 20], methods=["kmeans+gb", "kmeans+knn5"],
                     synthetic={"n_samples": 4000, "n_components": 4, "d": 4, "L": 3, "seed": 0}, seed=0,
                     clusterer_params={"kmeans": {"n_init": 3}},
                     regressor_params={"gb": {"n_estimators": 30, "max_depth": 2}})
    records = run_grid(cfg, verbose=False)
    assert all(record.is_ok for record in records)
    rmse_of = {}
    for record in records:
        rmse_of.setdefault(record.method, []).append(record.rmse)
    assert min(rmse_of["kmeans+gb"]) <= 0.8 * rmse_of["baseline+gb"][0]
    assert min(rmse_of["kmeans+knn5"]) == pytest.approx(rmse_of["baseline+knn5"][0], rel=0.05)
