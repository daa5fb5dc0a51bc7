#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Report bundle built from grid records alone: best-RMSE table with the maximum difference against
# the baseline, global and local RUI tables, per-cluster-size metric curves as CSV and SVG.

from typing import Optional, Dict, Any, List, Sequence
from dataclasses import dataclass, field
import os, io, json
from html import escape

import numpy as np
import pandas as pd

from config_files.benchmark import parse_method_id, baseline_method_id, cfg_regressor_defaults
from evaluator.rui import RuiTable, rui, local_rui, DEFAULT_RUI_COLUMNS, DEFAULT_RUI_WEIGHTS
from .grid import ExperimentRecord, records_to_dataframe, load_records

CURVE_METRICS = ("rmse", "r2", "silhouette", "train_s", "pred_s")
MAXIMUM_DIFFERENCE = "maximum difference"
CLUSTER_SIZE_AXIS = "cluster_size"
PARAMETER_AXES = {"dbscan": "eps", "meanshift": "bandwidth"}
REPORT_CONTEXT_FILE = "report_context.json"
_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass
class ReportBundle:
    best_rmse: pd.DataFrame
    rui_scores: pd.DataFrame
    rui_local_maxima: pd.DataFrame
    curves: Dict[str, pd.DataFrame]
    figures: Dict[str, str]
    header: Dict[str, Any] = field(default_factory=dict)


def _regressor_of(method_id: str) -> str:
    return parse_method_id(method_id)[1]


def best_rmse_table(df: pd.DataFrame) -> pd.DataFrame:
    """
    per regressor family: baseline rows, the lowest-RMSE configuration of every clustered method
    (best first) and a maximum difference row comparing the best clustered row with its baseline.
    RMSE difference is relative in percent; the other differences are absolute.
    """
    df = df.copy()
    df["regressor"] = df["method"].map(_regressor_of)
    df["family"] = df["regressor"].map(lambda regressor: cfg_regressor_defaults[regressor]["kind"])
    is_baseline = df["cluster_size"] == 0

    columns = ["family", "method", "cluster_size", "rmse", "r2", "silhouette", "train_s", "pred_s"]
    lst_rows = []
    for family in pd.unique(df["family"]):
        df_family = df[df["family"] == family]
        df_baseline = df_family[is_baseline[df_family.index]]
        df_clustered = df_family[~is_baseline[df_family.index]]
        for _, row in df_baseline.iterrows():
            lst_rows.append(row[columns].to_dict())

        lst_best = []
        for method_id in pd.unique(df_clustered["method"]):
            df_method = df_clustered[df_clustered["method"] == method_id]
            lst_best.append(df_method.loc[df_method["rmse"].idxmin()])
        lst_best = sorted(lst_best, key=lambda row: row["rmse"])
        for row in lst_best:
            lst_rows.append(row[columns].to_dict())

        if len(lst_best) == 0 or len(df_baseline) == 0:
            continue
        best = lst_best[0]
        df_matched = df_baseline[df_baseline["method"] == baseline_method_id(best["regressor"])]
        base = (df_matched if len(df_matched) > 0 else df_baseline).iloc[0]
        lst_rows.append({
            "family": family,
            "method": MAXIMUM_DIFFERENCE,
            "cluster_size": best["cluster_size"],
            "rmse": (best["rmse"] - base["rmse"]) / base["rmse"] * 100.0,
            "r2": best["r2"] - base["r2"],
            "silhouette": np.nan,
            "train_s": best["train_s"] - base["train_s"],
            "pred_s": best["pred_s"] - base["pred_s"]
        })
    return pd.DataFrame.from_records(lst_rows, columns=columns)


def _rui_source(df: pd.DataFrame) -> pd.DataFrame:
    # baselines carry no silhouette and are excluded from RUI tables.
    df_clustered = df[(df["cluster_size"] > 0) & df["silhouette"].notna()]
    return df_clustered.reset_index(drop=True)


def rui_tables(df: pd.DataFrame, rui_weights: Sequence[float]):
    """
    @return: (per-experiment scores, per-method local maxima, global optimum dict)
    """
    df_source = _rui_source(df)
    columns_scores = ["method", "cluster_size", "grid_value", "silhouette", "rmse", "pred_s", "rui", "local_rui"]
    columns_maxima = ["method", "cluster_size", "grid_value", "rmse", "silhouette", "pred_s", "local_rui_max", "rui", "global_optimum"]
    if len(df_source) == 0:
        return pd.DataFrame(columns=columns_scores), pd.DataFrame(columns=columns_maxima), {}

    table = RuiTable.from_dataframe(df_source, columns=DEFAULT_RUI_COLUMNS, weights=rui_weights)
    result = rui(table)
    local_scores = np.empty(table.n_experiments)
    lst_local = local_rui(table)
    for local in lst_local:
        local_scores[local.indices] = local.scores

    df_scores = df_source[["method", "cluster_size", "grid_value", "silhouette", "rmse", "pred_s"]].copy()
    df_scores["rui"] = result.scores
    df_scores["local_rui"] = local_scores

    lst_rows = []
    for local in lst_local:
        row = df_source.iloc[local.best_index]
        lst_rows.append({
            "method": row["method"],
            "cluster_size": row["cluster_size"],
            "grid_value": row["grid_value"],
            "rmse": row["rmse"],
            "silhouette": row["silhouette"],
            "pred_s": row["pred_s"],
            "local_rui_max": local.best_score,
            "rui": result.scores[local.best_index],
            "global_optimum": False
        })
    df_maxima = pd.DataFrame.from_records(lst_rows, columns=columns_maxima)
    df_maxima.loc[int(np.argmax(df_maxima["local_rui_max"].to_numpy())), "global_optimum"] = True

    best = df_source.iloc[result.best_index]
    global_best = {"method": best["method"], "cluster_size": int(best["cluster_size"]), "rui": float(result.scores[result.best_index])}
    return df_scores, df_maxima, global_best


def curve_axis(method_id: str) -> str:
    """x axis of a method's curves: the discovered cluster size, or the eps / bandwidth value of the cell."""
    clusterer, _ = parse_method_id(method_id)
    return PARAMETER_AXES.get(clusterer, CLUSTER_SIZE_AXIS)


def curve_name(metric: str, axis: str) -> str:
    return metric if axis == CLUSTER_SIZE_AXIS else f"{metric}_by_{axis}"


def _pivot(df: pd.DataFrame, axis: str, metric: str) -> pd.DataFrame:
    index = CLUSTER_SIZE_AXIS if axis == CLUSTER_SIZE_AXIS else "grid_value"
    curve = df.pivot_table(index=index, columns="method", values=metric, aggfunc="first", sort=True)
    curve = curve.reindex(columns=list(pd.unique(df["method"])))
    curve.index.name = axis
    return curve


def metric_curves(df: pd.DataFrame, df_scores: Optional[pd.DataFrame] = None) -> Dict[str, pd.DataFrame]:
    """
    metric value per grid point (rows) and method (columns).
    K-means kinds are indexed by cluster size, and the baseline of a method's regressor is placed at
    cluster size 0 of that method. DBSCAN / Mean Shift are indexed by their eps / bandwidth value,
    since several values may discover the same number of clusters; their curves are named
    `<metric>_by_eps` / `<metric>_by_bandwidth` and include the discovered cluster size.
    """
    is_baseline = df["cluster_size"] == 0
    df_clustered = df[~is_baseline]
    df_baseline = df[is_baseline].set_index("method")
    axes = df_clustered["method"].map(curve_axis)
    dict_curves = {}
    for axis in pd.unique(axes):
        df_axis = df_clustered[axes == axis]
        metrics = CURVE_METRICS if axis == CLUSTER_SIZE_AXIS else CURVE_METRICS + (CLUSTER_SIZE_AXIS,)
        for metric in metrics:
            curve = _pivot(df_axis, axis, metric)
            if axis == CLUSTER_SIZE_AXIS and metric != "silhouette" and len(df_baseline) > 0:
                baseline_row = {}
                for method_id in curve.columns:
                    baseline_id = baseline_method_id(_regressor_of(method_id))
                    baseline_row[method_id] = df_baseline.loc[baseline_id, metric] if baseline_id in df_baseline.index else np.nan
                curve = pd.concat([pd.DataFrame(baseline_row, index=pd.Index([0], name=CLUSTER_SIZE_AXIS)), curve])
            dict_curves[curve_name(metric, axis)] = curve

    if (df_scores is not None) and len(df_scores) > 0:
        axes = df_scores["method"].map(curve_axis)
        for axis in pd.unique(axes):
            dict_curves[curve_name("rui", axis)] = _pivot(df_scores[axes == axis], axis, "rui")
    return dict_curves


def line_chart_svg(curve: pd.DataFrame, title: str, y_label: str, x_label: str = "cluster size",
                   markers: Optional[Dict[str, Sequence[float]]] = None,
                   width: int = 720, height: int = 420) -> str:
    """
    minimal SVG line chart. one polyline per column; NaN points are skipped.

    @param markers: series name -> x positions marked with a square.
    """
    margin_left, margin_right, margin_top, margin_bottom = 70, 180, 40, 50
    plot_w = width - margin_left - margin_right
    plot_h = height - margin_top - margin_bottom

    x_values = np.asarray(curve.index, dtype=np.float64)
    y_values = curve.to_numpy(dtype=np.float64)
    finite = y_values[np.isfinite(y_values)]
    if len(x_values) == 0 or len(finite) == 0:
        x_min, x_max, y_min, y_max = 0.0, 1.0, 0.0, 1.0
    else:
        x_min, x_max = float(x_values.min()), float(x_values.max())
        y_min, y_max = float(finite.min()), float(finite.max())
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_min, y_max = y_min - 0.5, y_max + 0.5

    def sx(x):
        return margin_left + (x - x_min) / (x_max - x_min) * plot_w

    def sy(y):
        return margin_top + (y_max - y) / (y_max - y_min) * plot_h

    lst_svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{margin_left}" y1="{margin_top + plot_h}" x2="{margin_left + plot_w}" y2="{margin_top + plot_h}" stroke="black"/>',
        f'<line x1="{margin_left}" y1="{margin_top}" x2="{margin_left}" y2="{margin_top + plot_h}" stroke="black"/>',
        f'<text x="{margin_left + plot_w / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(x_label)}</text>',
        f'<text x="15" y="{margin_top + plot_h / 2:.1f}" text-anchor="middle" transform="rotate(-90 15 {margin_top + plot_h / 2:.1f})">{escape(y_label)}</text>'
    ]
    for tick in np.linspace(x_min, x_max, 6):
        lst_svg.append(f'<text x="{sx(tick):.1f}" y="{margin_top + plot_h + 16}" text-anchor="middle">{tick:.4g}</text>')
    for tick in np.linspace(y_min, y_max, 6):
        lst_svg.append(f'<text x="{margin_left - 6}" y="{sy(tick) + 4:.1f}" text-anchor="end">{tick:.4g}</text>')

    for idx, series in enumerate(curve.columns):
        color = _PALETTE[idx % len(_PALETTE)]
        values = curve[series].to_numpy(dtype=np.float64)
        is_finite = np.isfinite(values)
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(x_values[is_finite], values[is_finite]))
        if points:
            lst_svg.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        for x in (markers or {}).get(series, []):
            y = curve.at[x, series] if x in curve.index else np.nan
            if np.isfinite(y):
                lst_svg.append(f'<rect x="{sx(x) - 4:.2f}" y="{sy(y) - 4:.2f}" width="8" height="8" fill="none" stroke="{color}" stroke-width="1.5"/>')
        legend_y = margin_top + 16 * idx
        lst_svg.append(f'<line x1="{width - margin_right + 12}" y1="{legend_y}" x2="{width - margin_right + 32}" y2="{legend_y}" stroke="{color}" stroke-width="2"/>')
        lst_svg.append(f'<text x="{width - margin_right + 38}" y="{legend_y + 4}">{escape(str(series))}</text>')

    lst_svg.append("</svg>")
    return "\n".join(lst_svg) + "\n"


def report(records: List[ExperimentRecord], rui_weights: Sequence[float] = DEFAULT_RUI_WEIGHTS,
           rmse_upper_bound: Optional[float] = None, contended: bool = False) -> ReportBundle:
    """
    builds the report bundle. a pure function of the records and weights.

    @param rmse_upper_bound: standard deviation of the test targets (RMSE of a mean predictor) shown in the header.
    @param contended: cells were timed concurrently.
    """
    if len(records) == 0:
        raise ValueError(f"no records to report.")
    ok_records = [record for record in records if record.is_ok]
    if len(ok_records) == 0:
        raise ValueError(f"every one of the {len(records)} cells failed; nothing to report.")

    df = records_to_dataframe(ok_records)
    df_best = best_rmse_table(df)
    df_scores, df_maxima, global_best = rui_tables(df, rui_weights)
    dict_curves = metric_curves(df, df_scores)

    dict_labels = {"rmse": "RMSE", "r2": "R2", "silhouette": "silhouette", "train_s": "training time [s]",
                   "pred_s": "prediction time [s]", "rui": "global RUI", CLUSTER_SIZE_AXIS: "cluster size"}
    dict_figures = {}
    for name, curve in dict_curves.items():
        axis = curve.index.name
        metric = name[:-len(f"_by_{axis}")] if axis != CLUSTER_SIZE_AXIS else name
        x_label = dict_labels[axis] if axis == CLUSTER_SIZE_AXIS else axis
        markers = None
        if metric == "rui":
            x_column = CLUSTER_SIZE_AXIS if axis == CLUSTER_SIZE_AXIS else "grid_value"
            markers = {row["method"]: [row[x_column]] for _, row in df_maxima.iterrows() if curve_axis(row["method"]) == axis}
        dict_figures[name] = line_chart_svg(curve, title=f"{dict_labels[metric]} per {x_label}", y_label=dict_labels[metric],
                                            x_label=x_label, markers=markers)

    header = {
        "n_records": len(records),
        "n_failed": len(records) - len(ok_records),
        "failures": [{"method": record.method, "grid_value": record.grid_value, "reason": record.reason}
                     for record in records if not record.is_ok],
        "rui_weights": list(rui_weights),
        "rmse_upper_bound": rmse_upper_bound,
        "timings_contended": contended,
        "global_rui_best": global_best
    }
    return ReportBundle(best_rmse=df_best, rui_scores=df_scores, rui_local_maxima=df_maxima,
                        curves=dict_curves, figures=dict_figures, header=header)


def format_report(bundle: ReportBundle) -> str:
    header = bundle.header
    lst_lines = ["==== cluster-then-predict benchmark report ===="]
    if header.get("rmse_upper_bound") is not None:
        lst_lines.append(f"RMSE upper bound (test target std): {header['rmse_upper_bound']:.6g}")
    lst_lines.append(f"records: {header['n_records']}, failed: {header['n_failed']}")
    if header.get("timings_contended"):
        lst_lines.append("timings were measured with concurrent cells (contended).")
    lst_lines += ["", "=== best RMSE per method ===", bundle.best_rmse.to_string(index=False)]
    lst_lines += ["", "=== local RUI maxima ===", bundle.rui_local_maxima.to_string(index=False)]
    if header.get("global_rui_best"):
        best = header["global_rui_best"]
        lst_lines.append(f"global RUI optimum: {best['method']} with cluster size {best['cluster_size']} (RUI={best['rui']:.4f})")
    if header["n_failed"] > 0:
        lst_lines += ["", "=== failed cells ==="]
        lst_lines += [f"{failure['method']} (grid value {failure['grid_value']}): {failure['reason']}" for failure in header["failures"]]
    return "\n".join(lst_lines) + "\n"


def write_report(bundle: ReportBundle, out_dir: str) -> List[str]:
    """writes CSV tables, SVG figures, report.txt and summary.json. returns written paths."""
    os.makedirs(os.path.join(out_dir, "curves"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "figures"), exist_ok=True)
    lst_paths = []

    def _csv(df: pd.DataFrame, path: str, index: bool = False):
        df.to_csv(path, index=index, float_format="%.17g")
        lst_paths.append(path)

    _csv(bundle.best_rmse, os.path.join(out_dir, "best_rmse.csv"))
    _csv(bundle.rui_scores, os.path.join(out_dir, "rui_scores.csv"))
    _csv(bundle.rui_local_maxima, os.path.join(out_dir, "rui_local_maxima.csv"))
    for metric, curve in bundle.curves.items():
        _csv(curve, os.path.join(out_dir, "curves", f"{metric}.csv"), index=True)
    for metric, svg in bundle.figures.items():
        path = os.path.join(out_dir, "figures", f"{metric}.svg")
        with io.open(path, mode="w") as ofs:
            ofs.write(svg)
        lst_paths.append(path)

    path = os.path.join(out_dir, "report.txt")
    with io.open(path, mode="w") as ofs:
        ofs.write(format_report(bundle))
    lst_paths.append(path)
    path = os.path.join(out_dir, "summary.json")
    with io.open(path, mode="w") as ofs:
        json.dump(bundle.header, ofs, indent=2, default=str)
    lst_paths.append(path)
    return lst_paths


def save_report_context(out_dir: str, rui_weights: Sequence[float], rmse_upper_bound: Optional[float] = None,
                        contended: bool = False) -> str:
    """stores the report inputs that records.csv does not carry, next to it."""
    path = os.path.join(out_dir, REPORT_CONTEXT_FILE)
    context = {
        "rui_weights": [float(w) for w in rui_weights],
        "rmse_upper_bound": None if rmse_upper_bound is None else float(rmse_upper_bound),
        "contended": bool(contended)
    }
    with io.open(path, mode="w") as ofs:
        json.dump(context, ofs, indent=2)
    return path


def report_from_directory(out_dir: str, records_file: str = "records.csv") -> ReportBundle:
    """rebuilds the report bundle from the records CSV and the stored report context of a grid run."""
    records = load_records(os.path.join(out_dir, records_file))
    path = os.path.join(out_dir, REPORT_CONTEXT_FILE)
    context = {}
    if os.path.exists(path):
        with io.open(path, mode="r") as ifs:
            context = json.load(ifs)
    return report(records, rui_weights=context.get("rui_weights", DEFAULT_RUI_WEIGHTS),
                  rmse_upper_bound=context.get("rmse_upper_bound"), contended=context.get("contended", False))
