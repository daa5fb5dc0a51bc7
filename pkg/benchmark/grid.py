#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Experiment grid: baselines (cluster size 0) plus every (method, cluster size) cell.
# Cells are independent jobs; each one draws its randomness from a seed derived from
# (global seed, method id, grid value), so results do not depend on scheduling.

from typing import Optional, Dict, Any, List, Tuple, Union
from dataclasses import dataclass, field, asdict, fields
import os, io, time, copy
import warnings

import numpy as np
import pandas as pd
import progressbar
from joblib import Parallel, delayed

from config_files.benchmark import cfg_grid_defaults, cfg_clusterer_defaults, cfg_regressor_defaults
from config_files.benchmark import parse_method_id, baseline_method_id, distinct_regressors, BASELINE_PREFIX
from dataset import Dataset, load_csv, SyntheticConfig, generate_synthetic, SplitSpec, split, fit_scaler, apply_scaler
from dataset.utils import derive_seed
from evaluator.metrics import rmse, r2, rmse_per_load
from evaluator.silhouette import silhouette
from model.clustering import build_cluster_config
from model.regressor import RegressorSpec, predict_regressor_set
from pipeline import train_divide_conquer, predict_batch
from pipeline.divide_and_conquer import N_TIMING_REPEATS

RECORD_COLUMNS = ["method", "cluster_size", "rmse", "r2", "silhouette", "train_s", "pred_s", "seed", "status", "reason"]
EXTRA_RECORD_COLUMNS = ["rmse_per_load", "grid_value"]
STATUS_OK = "ok"
STATUS_FAILED = "failed"


@dataclass
class ExperimentRecord:
    method: str
    cluster_size: int
    rmse: Optional[float] = None
    r2: Optional[float] = None
    silhouette: Optional[float] = None
    train_s: Optional[float] = None
    pred_s: Optional[float] = None
    seed: int = 0
    status: str = STATUS_OK
    reason: str = ""
    rmse_per_load: List[float] = field(default_factory=list)
    # parameter of the grid axis: k for K-means kinds, eps / bandwidth for DBSCAN / Mean Shift, 0 for baselines.
    grid_value: float = 0

    @property
    def is_baseline(self) -> bool:
        return self.cluster_size == 0 and self.method.startswith(BASELINE_PREFIX + "+")

    @property
    def is_ok(self) -> bool:
        return self.status == STATUS_OK

    def result_fields(self) -> Dict[str, Any]:
        """every field except the wall-clock times."""
        ret = asdict(self)
        del ret["train_s"]
        del ret["pred_s"]
        return ret


@dataclass
class GridConfig:
    cluster_sizes: List[int] = field(default_factory=lambda: list(cfg_grid_defaults["cluster_sizes"]))
    methods: List[str] = field(default_factory=lambda: list(cfg_grid_defaults["methods"]))
    rui_weights: List[float] = field(default_factory=lambda: list(cfg_grid_defaults["rui_weights"]))
    data_path: Optional[str] = None
    n_targets: int = 3
    synthetic: Dict[str, Any] = field(default_factory=lambda: copy.deepcopy(cfg_grid_defaults["synthetic"]))
    train_fraction: float = 0.8
    seed: int = 0
    threads: int = 1
    subsample_silhouette: Optional[int] = None
    eps_values: List[float] = field(default_factory=lambda: list(cfg_grid_defaults["eps_values"]))
    bandwidth_values: List[float] = field(default_factory=lambda: list(cfg_grid_defaults["bandwidth_values"]))
    clusterer_params: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    regressor_params: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    include_baselines: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if len(self.methods) == 0:
            raise ValueError(f"`methods` must not be empty.")
        for method_id in self.methods:
            clusterer, _ = parse_method_id(method_id)
            if clusterer == BASELINE_PREFIX:
                raise ValueError(f"baselines are added automatically; remove `{method_id}` from `methods`.")
        if len(self.cluster_sizes) == 0 or any(k < 1 for k in self.cluster_sizes):
            raise ValueError(f"cluster sizes must be positive: {self.cluster_sizes}")
        if any(b <= a for a, b in zip(self.cluster_sizes[:-1], self.cluster_sizes[1:])):
            raise ValueError(f"cluster sizes must be strictly increasing: {self.cluster_sizes}")
        if abs(sum(self.rui_weights) - 1.0) > 1e-12:
            raise ValueError(f"`rui_weights` must sum to 1: {self.rui_weights}")
        if self.threads < 1:
            raise ValueError(f"`threads` must be positive: {self.threads}")
        if self.seed < 0:
            raise ValueError(f"`seed` must be unsigned: {self.seed}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, dict_config: Dict[str, Any]) -> "GridConfig":
        valid_names = {f.name for f in fields(cls)}
        unknown = set(dict_config.keys()) - valid_names
        if len(unknown) > 0:
            raise ValueError(f"unknown grid config key(s): {sorted(unknown)}")
        return cls(**dict_config)

    def regressor_spec(self, regressor: str) -> RegressorSpec:
        cfg = copy.deepcopy(cfg_regressor_defaults[regressor])
        cfg["params"].update(self.regressor_params.get(regressor, {}))
        return RegressorSpec(name=regressor, kind=cfg["kind"], params=cfg["params"], per_load=cfg["per_load"])

    def clusterer_params_of(self, clusterer: str) -> Dict[str, Any]:
        params = copy.deepcopy(cfg_clusterer_defaults[clusterer])
        params.update(self.clusterer_params.get(clusterer, {}))
        return params


@dataclass
class _Cell:
    method: str
    clusterer: Optional[str]
    regressor: str
    grid_value: Union[int, float]
    seed: int


def load_grid_dataset(cfg: GridConfig) -> Dataset:
    if cfg.data_path is not None:
        return load_csv(cfg.data_path, n_targets=cfg.n_targets)
    return generate_synthetic(SyntheticConfig.from_dict(cfg.synthetic))


def enumerate_cells(cfg: GridConfig) -> List[_Cell]:
    """baselines first (one per distinct regressor), then methods in order, each over its grid axis."""
    lst_cells = []
    if cfg.include_baselines:
        for regressor in distinct_regressors(cfg.methods):
            method_id = baseline_method_id(regressor)
            lst_cells.append(_Cell(method=method_id, clusterer=None, regressor=regressor, grid_value=0,
                                   seed=derive_seed(cfg.seed, method_id, 0)))
    for method_id in cfg.methods:
        clusterer, regressor = parse_method_id(method_id)
        if clusterer == "dbscan":
            axis = cfg.eps_values
        elif clusterer == "meanshift":
            axis = cfg.bandwidth_values
        else:
            axis = cfg.cluster_sizes
        for grid_value in axis:
            key = grid_value if isinstance(grid_value, int) else repr(float(grid_value))
            lst_cells.append(_Cell(method=method_id, clusterer=clusterer, regressor=regressor, grid_value=grid_value,
                                   seed=derive_seed(cfg.seed, method_id, key)))
    return lst_cells


def _cluster_config(cell: _Cell, cfg: GridConfig):
    params = cfg.clusterer_params_of(cell.clusterer)
    if cell.clusterer == "dbscan":
        params["eps"] = cell.grid_value
    elif cell.clusterer == "meanshift":
        params["bandwidth"] = cell.grid_value
    else:
        params["k"] = int(cell.grid_value)
    params["seed"] = cell.seed
    return build_cluster_config(cell.clusterer, **params)


def _run_baseline(cell: _Cell, cfg: GridConfig, trainset: Dataset, testset: Dataset) -> ExperimentRecord:
    spec = cfg.regressor_spec(cell.regressor)
    t_start = time.perf_counter()
    regressors = spec.fit(trainset.features, trainset.targets, seed=cell.seed)
    train_s = time.perf_counter() - t_start

    lst_elapsed = []
    Y_pred = None
    for _ in range(N_TIMING_REPEATS):
        t_start = time.perf_counter()
        Y_pred = predict_regressor_set(regressors, testset.features)
        lst_elapsed.append(time.perf_counter() - t_start)

    return ExperimentRecord(method=cell.method, cluster_size=0, rmse=rmse(testset.targets, Y_pred),
                            r2=r2(testset.targets, Y_pred), silhouette=None, train_s=train_s,
                            pred_s=float(np.median(lst_elapsed)), seed=cell.seed,
                            rmse_per_load=rmse_per_load(testset.targets, Y_pred), grid_value=0)


def _run_clustered(cell: _Cell, cfg: GridConfig, trainset: Dataset, testset: Dataset) -> ExperimentRecord:
    spec = cfg.regressor_spec(cell.regressor)
    cluster_config = _cluster_config(cell, cfg)
    t_start = time.perf_counter()
    pipeline = train_divide_conquer(trainset, clusterer=cluster_config, regressor=spec, seed=cell.seed)
    train_s = time.perf_counter() - t_start

    Y_pred, pred_s = predict_batch(testset.features, pipeline)
    score = None
    if pipeline.n_clusters >= 2:
        score = silhouette(trainset.features, pipeline.cluster_model.labels, sample_size=cfg.subsample_silhouette,
                           seed=cell.seed)

    return ExperimentRecord(method=cell.method, cluster_size=pipeline.n_clusters, rmse=rmse(testset.targets, Y_pred),
                            r2=r2(testset.targets, Y_pred), silhouette=score, train_s=train_s, pred_s=pred_s,
                            seed=cell.seed, rmse_per_load=rmse_per_load(testset.targets, Y_pred),
                            grid_value=cell.grid_value)


def run_cell(cell: _Cell, cfg: GridConfig, trainset: Dataset, testset: Dataset) -> ExperimentRecord:
    """runs one cell. any exception becomes a failed record carrying the reason."""
    try:
        if cell.clusterer is None:
            return _run_baseline(cell, cfg, trainset, testset)
        return _run_clustered(cell, cfg, trainset, testset)
    except Exception as e:
        cluster_size = 0 if cell.clusterer is None else (int(cell.grid_value) if cell.clusterer in ("kmeans", "ot_kmeans") else 0)
        return ExperimentRecord(method=cell.method, cluster_size=cluster_size, seed=cell.seed, status=STATUS_FAILED,
                                reason=f"{type(e).__name__}: {e}", grid_value=cell.grid_value)


def prepare_datasets(cfg: GridConfig, verbose: bool = False) -> Tuple[Dataset, Dataset]:
    """loads the dataset, splits it and standardizes features with trainset statistics. targets stay unscaled."""
    dataset = load_grid_dataset(cfg)
    trainset, testset = split(dataset, SplitSpec(train_fraction=cfg.train_fraction, seed=derive_seed(cfg.seed, "split")))
    scaler = fit_scaler(trainset)
    trainset, testset = apply_scaler(scaler, trainset), apply_scaler(scaler, testset)
    if verbose:
        print(f"trainset: {trainset.n_samples}, testset: {testset.n_samples}, features: {trainset.n_features}, loads: {trainset.n_targets}")
    return trainset, testset


def run_grid(cfg: GridConfig, verbose: bool = True,
             datasets: Optional[Tuple[Dataset, Dataset]] = None) -> List[ExperimentRecord]:
    """
    runs every cell of the grid on up to `cfg.threads` threads. records come back in cell order.

    @param datasets: pre-split (trainset, testset) with standardized features. loaded from `cfg` when omitted.
    """
    if datasets is None:
        trainset, testset = prepare_datasets(cfg, verbose=verbose)
    else:
        trainset, testset = datasets
    lst_cells = enumerate_cells(cfg)
    if cfg.threads > 1:
        warnings.warn(f"cells run on {cfg.threads} threads: timings are contended.")

    jobs = (delayed(run_cell)(cell, cfg, trainset, testset) for cell in lst_cells)
    results = Parallel(n_jobs=cfg.threads, prefer="threads", return_as="generator")(jobs)

    lst_records = []
    q = progressbar.ProgressBar(max_value=len(lst_cells)) if verbose else None
    for idx, record in enumerate(results):
        lst_records.append(record)
        if q is not None:
            q.update(idx + 1)
    if q is not None:
        q.finish()

    if verbose:
        n_failed = sum(not record.is_ok for record in lst_records)
        print(f"cells: {len(lst_records)}, failed: {n_failed}")
        for record in lst_records:
            if not record.is_ok:
                print(f"  {record.method} (grid value {record.grid_value}): {record.reason}")
    return lst_records


def records_to_dataframe(records: List[ExperimentRecord]) -> pd.DataFrame:
    df = pd.DataFrame.from_records([asdict(record) for record in records], columns=RECORD_COLUMNS + EXTRA_RECORD_COLUMNS)
    df["rmse_per_load"] = [";".join(repr(float(v)) for v in record.rmse_per_load) for record in records]
    return df


def save_records(records: List[ExperimentRecord], path: str):
    dir_name = os.path.dirname(path)
    if dir_name:
        os.makedirs(dir_name, exist_ok=True)
    records_to_dataframe(records).to_csv(path, index=False, float_format="%.17g")


def _optional_float(value) -> Optional[float]:
    return None if pd.isna(value) else float(value)


def load_records(path: str) -> List[ExperimentRecord]:
    if not os.path.exists(path):
        raise IOError(f"records file not found: {path}")
    df = pd.read_csv(path, keep_default_na=True, dtype={"method": str, "status": str, "reason": str, "rmse_per_load": str})
    missing = [name for name in RECORD_COLUMNS if name not in df.columns]
    if len(missing) > 0:
        raise ValueError(f"records file lacks column(s): {missing}")

    lst_records = []
    for row in df.to_dict(orient="records"):
        per_load = row.get("rmse_per_load")
        per_load = [] if (not isinstance(per_load, str) or per_load == "") else [float(v) for v in per_load.split(";")]
        grid_value = row.get("grid_value", 0)
        grid_value = 0 if pd.isna(grid_value) else grid_value
        grid_value = int(grid_value) if float(grid_value).is_integer() else float(grid_value)
        lst_records.append(ExperimentRecord(
            method=row["method"], cluster_size=int(row["cluster_size"]),
            rmse=_optional_float(row["rmse"]), r2=_optional_float(row["r2"]), silhouette=_optional_float(row["silhouette"]),
            train_s=_optional_float(row["train_s"]), pred_s=_optional_float(row["pred_s"]), seed=int(row["seed"]),
            status=row["status"], reason="" if pd.isna(row["reason"]) else row["reason"],
            rmse_per_load=per_load, grid_value=grid_value
        ))
    return lst_records
