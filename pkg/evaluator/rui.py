#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Real-world Unified Index: every metric column is min-max normalized so that higher is better,
# then the columns are combined by a weighted sum. "global" normalizes over all experiments,
# "local" over the experiments of one group (typically one method).

from typing import Optional, Dict, Any, List, Sequence, Tuple
from dataclasses import dataclass, field
import os, io, json

import numpy as np
import pandas as pd

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
DIRECTIONS = (MAXIMIZE, MINIMIZE)
WEIGHT_SUM_TOLERANCE = 1e-12
LOCAL_WINDOW_WIDTH = 40
DEFAULT_RUI_COLUMNS = (("silhouette", MAXIMIZE), ("rmse", MINIMIZE), ("pred_s", MINIMIZE))
DEFAULT_RUI_WEIGHTS = (0.3, 0.4, 0.3)


@dataclass
class MetricColumn:
    name: str
    direction: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.direction not in DIRECTIONS:
            raise ValueError(f"invalid direction of `{self.name}`: {self.direction}. available: {DIRECTIONS}")
        if len(self.values) == 0:
            raise ValueError(f"metric column `{self.name}` is empty.")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"metric column `{self.name}` contains non-finite value(s).")


@dataclass
class RuiResult:
    scores: np.ndarray
    best_index: int
    best_meta: Optional[Dict[str, Any]] = None
    # experiment rows the scores refer to; None means all rows of the table.
    indices: Optional[np.ndarray] = None

    @property
    def best_score(self) -> float:
        if self.indices is None:
            return float(self.scores[self.best_index])
        return float(self.scores[int(np.flatnonzero(self.indices == self.best_index)[0])])


class RuiTable(object):

    def __init__(self, columns: Sequence[MetricColumn], weights: Sequence[float],
                 experiment_meta: Optional[List[Dict[str, Any]]] = None):
        """
        @param columns: metric columns over the same m experiments.
        @param weights: one nonnegative weight per column, summing to one.
        @param experiment_meta: per-row metadata such as {"method": ..., "cluster_size": ...}
        """
        columns = list(columns)
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        if len(columns) == 0:
            raise ValueError(f"at least one metric column is required.")
        if len(weights) != len(columns):
            raise ValueError(f"number of weights {len(weights)} differs from number of columns {len(columns)}")
        if np.any(weights < 0):
            raise ValueError(f"weights must be nonnegative: {weights.tolist()}")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValueError(f"weights must sum to 1: {weights.sum()!r}")
        n_rows = {len(column.values) for column in columns}
        if len(n_rows) != 1:
            raise ValueError(f"metric columns must share their length: {sorted(n_rows)}")
        n_experiments = n_rows.pop()
        if experiment_meta is None:
            experiment_meta = [{} for _ in range(n_experiments)]
        if len(experiment_meta) != n_experiments:
            raise ValueError(f"experiment_meta length {len(experiment_meta)} differs from {n_experiments} experiments")

        self._columns = columns
        self._weights = weights
        self._experiment_meta = [dict(meta) for meta in experiment_meta]

    @property
    def columns(self) -> List[MetricColumn]:
        return self._columns

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def experiment_meta(self) -> List[Dict[str, Any]]:
        return self._experiment_meta

    @property
    def n_experiments(self) -> int:
        return len(self._columns[0].values)

    def subset(self, indices: Sequence[int]) -> "RuiTable":
        indices = np.asarray(indices, dtype=np.int64)
        columns = [MetricColumn(column.name, column.direction, column.values[indices]) for column in self._columns]
        return RuiTable(columns=columns, weights=self._weights, experiment_meta=[self._experiment_meta[i] for i in indices])

    def to_dataframe(self) -> pd.DataFrame:
        df = pd.DataFrame.from_records(self._experiment_meta) if any(self._experiment_meta) else pd.DataFrame(index=range(self.n_experiments))
        for column in self._columns:
            df[column.name] = column.values
        return df

    @classmethod
    def from_dataframe(cls, df: pd.DataFrame, columns: Sequence[Tuple[str, str]], weights: Sequence[float],
                       meta_columns: Sequence[str] = ("method", "cluster_size")) -> "RuiTable":
        lst_columns = []
        for name, direction in columns:
            if name not in df.columns:
                raise ValueError(f"metric column not found: {name}. available: {list(df.columns)}")
            lst_columns.append(MetricColumn(name=name, direction=direction, values=df[name].to_numpy(dtype=np.float64)))
        meta_columns = [name for name in meta_columns if name in df.columns]
        experiment_meta = df[meta_columns].to_dict(orient="records") if len(meta_columns) > 0 else None
        return cls(columns=lst_columns, weights=weights, experiment_meta=experiment_meta)

    def save(self, path: str):
        """writes the table as CSV plus a `<path>.json` sidecar holding directions and weights."""
        dir_name = os.path.dirname(path)
        if dir_name:
            os.makedirs(dir_name, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False, float_format="%.17g")
        sidecar = {
            "columns": [{"name": column.name, "direction": column.direction} for column in self._columns],
            "weights": self._weights.tolist()
        }
        with io.open(path + ".json", mode="w") as ofs:
            json.dump(sidecar, ofs, indent=2)

    @classmethod
    def load(cls, path: str) -> "RuiTable":
        path_sidecar = path + ".json"
        if not os.path.exists(path_sidecar):
            raise IOError(f"sidecar file not found: {path_sidecar}")
        with io.open(path_sidecar, mode="r") as ifs:
            sidecar = json.load(ifs)
        df = pd.read_csv(path)
        columns = [(column["name"], column["direction"]) for column in sidecar["columns"]]
        return cls.from_dataframe(df, columns=columns, weights=sidecar["weights"])


def normalize_column(column: MetricColumn) -> np.ndarray:
    """
    min-max normalization with the better end mapped to 1. a constant column maps to 0.5.
    """
    values = column.values
    v_min, v_max = values.min(), values.max()
    if v_max == v_min:
        return np.full(len(values), 0.5)
    if column.direction == MAXIMIZE:
        return (values - v_min) / (v_max - v_min)
    else:
        return (v_max - values) / (v_max - v_min)


def rui(table: RuiTable) -> RuiResult:
    normalized = np.stack([normalize_column(column) for column in table.columns], axis=1)
    scores = np.clip((normalized * table.weights).sum(axis=1), 0.0, 1.0)
    best_index = int(np.argmax(scores))
    return RuiResult(scores=scores, best_index=best_index, best_meta=table.experiment_meta[best_index])


def window_groups(n_experiments: int, width: int = LOCAL_WINDOW_WIDTH) -> List[np.ndarray]:
    """consecutive blocks of `width` experiments: rows [w*l, w*l + w) form group l."""
    if width < 1:
        raise ValueError(f"`width` must be positive: {width}")
    return [np.arange(begin, min(begin + width, n_experiments)) for begin in range(0, n_experiments, width)]


def method_groups(table: RuiTable, key: str = "method") -> Dict[Any, np.ndarray]:
    """experiment rows grouped by a metadata key, in order of first appearance."""
    dict_groups = {}
    for index, meta in enumerate(table.experiment_meta):
        dict_groups.setdefault(meta.get(key), []).append(index)
    return {group: np.array(indices, dtype=np.int64) for group, indices in dict_groups.items()}


def local_rui(table: RuiTable, groups: Optional[Sequence[Sequence[int]]] = None) -> List[RuiResult]:
    """
    RUI re-normalized within every group. `best_index` of each result refers to the rows of the full table.

    @param groups: partition of the experiment rows. defaults to grouping by method.
    """
    if groups is None:
        groups = list(method_groups(table).values())
    groups = [np.asarray(group, dtype=np.int64) for group in groups]
    for group_index, group in enumerate(groups):
        if len(group) == 0:
            raise ValueError(f"group {group_index} is empty.")
    covered = np.sort(np.concatenate(groups))
    if not np.array_equal(covered, np.arange(table.n_experiments)):
        raise ValueError(f"groups must partition the {table.n_experiments} experiment rows.")

    lst_results = []
    for group in groups:
        local = rui(table.subset(group))
        best_index = int(group[local.best_index])
        lst_results.append(RuiResult(scores=local.scores, best_index=best_index,
                                     best_meta=table.experiment_meta[best_index], indices=group))
    return lst_results


def rank_table(table: RuiTable, local: bool = False) -> pd.DataFrame:
    """table rows with their (local) RUI score, best first. ties keep the row order."""
    df = table.to_dataframe()
    if local:
        scores = np.empty(table.n_experiments)
        for result in local_rui(table):
            scores[result.indices] = result.scores
    else:
        scores = rui(table).scores
    df["rui"] = scores
    return df.sort_values("rui", ascending=False, kind="mergesort").reset_index(drop=True)
