#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Command line interface of the cluster-then-predict benchmark.
#
# * generate: write a synthetic dataset as CSV.
# * train: fit scaler + cluster-then-predict pipeline on a CSV and save it to a directory.
# * predict: apply a saved pipeline to a CSV.
# * grid: run the experiment grid and write records + report bundle.
# * rui: rank the experiments of an existing metrics CSV by (local) RUI.
#
# exit status: 0 success, 1 usage error, 2 runtime failure.

from typing import Optional, Dict, Any, List
from pprint import pprint
import sys, io, os, json
import argparse

import numpy as np
import pandas as pd

from config_files.utils import nullable_string, nullable_json_loads, load_json_config, overwrite_configs
from config_files.benchmark import cfg_synthetic_defaults, cfg_grid_defaults, cfg_clusterer_defaults, cfg_regressor_defaults
from dataset import Dataset, load_csv, save_csv, read_csv_table, SyntheticConfig, generate_synthetic, fit_scaler, apply_scaler
from evaluator.metrics import rmse, r2
from evaluator.rui import RuiTable, rank_table, MAXIMIZE, MINIMIZE, DEFAULT_RUI_COLUMNS
from model.clustering import build_cluster_config
from model.regressor import RegressorSpec
from pipeline import train_divide_conquer, predict_batch, save_pipeline, load_pipeline
from benchmark.grid import GridConfig, run_grid, save_records, prepare_datasets
from benchmark.report import write_report, format_report, save_report_context, report_from_directory

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _default_pipeline_configs():
    dict_defaults = {
        "clusterer": {
            "method": "kmeans",
            "k": 10
        },
        "regressor": {
            "name": "gb",
            "params": {}
        }
    }
    return dict_defaults


def _parse_args(argv: List[str]):
    parser = _ArgumentParser(prog="cluster_then_predict.py", description="cluster-then-predict regression: data generation, training, prediction and benchmark grid.")
    subparsers = parser.add_subparsers(dest="command", metavar="{generate,train,predict,grid,rui}")
    subparsers.required = True

    p = subparsers.add_parser("generate", help="write a synthetic dataset as CSV.")
    p.add_argument("--config", required=False, type=nullable_string, default=None, help="synthetic dataset config (json). DEFAULT: built-in defaults")
    p.add_argument("--synthetic", required=False, type=nullable_json_loads, default=None, help="inline json overrides. e.g. `{'n_samples': 5000}`")
    p.add_argument("--out", required=True, type=str, help="output CSV path.")
    p.add_argument("--seed", required=False, type=int, default=None, help="overrides the config seed.")

    p = subparsers.add_parser("train", help="fit a pipeline on a CSV and save it.")
    p.add_argument("--data", required=True, type=str, help="training CSV. trailing `--n-targets` columns are targets.")
    p.add_argument("--n-targets", dest="n_targets", required=False, type=int, default=3, help="number of loads L. DEFAULT: 3")
    p.add_argument("--config", required=False, type=nullable_string, default=None, help="pipeline config (json) with `clusterer` and `regressor` entries.")
    p.add_argument("--pipeline", required=False, type=nullable_json_loads, default=None, help="inline json overrides of the pipeline config.")
    p.add_argument("--out-dir", dest="out_dir", required=True, type=str, help="directory the pipeline is saved to.")
    p.add_argument("--seed", required=False, type=int, default=0, help="seed of clusterer and regressors. DEFAULT: 0")
    p.add_argument("--threads", required=False, type=int, default=1, help="number of threads fitting cluster banks. DEFAULT: 1")

    p = subparsers.add_parser("predict", help="apply a saved pipeline to a CSV.")
    p.add_argument("--model", required=True, type=str, help="directory of a saved pipeline.")
    p.add_argument("--data", required=True, type=str, help="CSV with feature columns, optionally followed by target columns.")
    p.add_argument("--out", required=True, type=str, help="output CSV of predictions.")
    p.add_argument("--n-targets", dest="n_targets", required=False, type=int, default=None, help="number of loads L. DEFAULT: the value stored with the model.")

    p = subparsers.add_parser("grid", help="run the experiment grid and write records + report.")
    p.add_argument("--data", required=False, type=nullable_string, default=None, help="dataset CSV. DEFAULT: synthetic dataset of the grid config.")
    p.add_argument("--n-targets", dest="n_targets", required=False, type=int, default=None, help="number of loads L of `--data`.")
    p.add_argument("--config", required=False, type=nullable_string, default=None, help="grid config (json).")
    p.add_argument("--grid", required=False, type=nullable_json_loads, default=None, help="inline json overrides of the grid config. dotted keys allowed.")
    p.add_argument("--seed", required=False, type=int, default=None, help="global seed. DEFAULT: seed of the grid config.")
    p.add_argument("--out-dir", dest="out_dir", required=False, type=str, default="./experiment_results/", help="output directory.")
    p.add_argument("--threads", required=False, type=int, default=None, help="number of concurrent cells.")
    p.add_argument("--subsample-silhouette", dest="subsample_silhouette", required=False, type=int, default=None, help="silhouette subsample size. DEFAULT: all training samples.")
    p.add_argument("--repeats", required=False, type=int, default=1, help="repeat the grid with seeds seed, seed+1, ... DEFAULT: 1")
    p.add_argument("--quiet", action="store_true", help="suppress progress output.")

    p = subparsers.add_parser("rui", help="rank experiments of a metrics CSV by RUI.")
    p.add_argument("--metrics", required=True, type=str, help="metrics CSV, e.g. the records of a grid run.")
    p.add_argument("--weights", required=False, type=str, default="0.3,0.4,0.3", help="comma separated weights. DEFAULT: 0.3,0.4,0.3")
    p.add_argument("--columns", required=False, type=str, default=",".join(f"{name}:{direction[:3]}" for name, direction in DEFAULT_RUI_COLUMNS),
                   help="comma separated `name:max|min`. DEFAULT: silhouette:max,rmse:min,pred_s:min")
    p.add_argument("--local", action="store_true", help="normalize within each method (local RUI).")

    return parser.parse_args(argv)


def _parse_float_list(value: str, name: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"invalid `{name}`: {value}")


def _parse_columns(value: str):
    lst_columns = []
    for item in value.split(","):
        name, _, direction = item.strip().partition(":")
        if direction in ("max", MAXIMIZE):
            lst_columns.append((name, MAXIMIZE))
        elif direction in ("min", MINIMIZE):
            lst_columns.append((name, MINIMIZE))
        else:
            raise UsageError(f"invalid column spec `{item}`. expected `name:max` or `name:min`.")
    return lst_columns


def command_generate(args) -> int:
    cfg = overwrite_configs(cfg_synthetic_defaults, load_json_config(args.config) if args.config else None, config_name="synthetic")
    cfg = overwrite_configs(cfg, args.synthetic, config_name="synthetic")
    if args.seed is not None:
        cfg["seed"] = args.seed
    synthetic_config = SyntheticConfig.from_dict(cfg)
    dataset = generate_synthetic(synthetic_config)
    save_csv(dataset, args.out)
    pprint(dataset.verbose)
    print(f"saved: {args.out}")
    return EXIT_SUCCESS


def _regressor_spec(cfg_regressor: Dict[str, Any]) -> RegressorSpec:
    name = cfg_regressor["name"]
    if name not in cfg_regressor_defaults:
        raise UsageError(f"unknown regressor: {name}. available: {list(cfg_regressor_defaults.keys())}")
    cfg = overwrite_configs(cfg_regressor_defaults[name], {"params": cfg_regressor.get("params", {})}, config_name=f"regressor.{name}")
    return RegressorSpec(name=name, kind=cfg["kind"], params=cfg["params"], per_load=cfg["per_load"])


def command_train(args) -> int:
    cfg = overwrite_configs(_default_pipeline_configs(), load_json_config(args.config) if args.config else None, config_name="pipeline")
    cfg = overwrite_configs(cfg, args.pipeline, config_name="pipeline")
    pprint(cfg, compact=True)

    params = dict(cfg["clusterer"])
    method = params.pop("method")
    if method not in cfg_clusterer_defaults:
        raise UsageError(f"unknown clusterer: {method}. available: {list(cfg_clusterer_defaults.keys())}")
    params = overwrite_configs(cfg_clusterer_defaults[method], params, config_name=f"clusterer.{method}", verbose=False)
    params["seed"] = args.seed
    cluster_config = build_cluster_config(method, **params)
    regressor_spec = _regressor_spec(cfg["regressor"])

    trainset = load_csv(args.data, n_targets=args.n_targets)
    scaler = fit_scaler(trainset)
    trainset = apply_scaler(scaler, trainset)
    pprint(trainset.verbose)

    pipeline = train_divide_conquer(trainset, clusterer=cluster_config, regressor=regressor_spec, n_targets=args.n_targets,
                                    seed=args.seed, scaler=scaler, n_jobs=args.threads, verbose=True)
    save_pipeline(pipeline, args.out_dir)
    pprint(pipeline.verbose, compact=True)
    print(f"saved: {args.out_dir}")
    return EXIT_SUCCESS


def command_predict(args) -> int:
    pipeline = load_pipeline(args.model)
    if (args.n_targets is not None) and (args.n_targets != pipeline.n_targets):
        raise ValueError(f"`--n-targets` {args.n_targets} differs from the {pipeline.n_targets} loads of the model.")
    header, values = read_csv_table(args.data)
    n_features = pipeline.n_features
    if len(header) not in (n_features, n_features + pipeline.n_targets):
        raise ValueError(f"expected {n_features} feature columns, optionally followed by {pipeline.n_targets} target columns: got {len(header)} columns")

    X = values[:, :n_features]
    if pipeline.scaler is not None:
        X = pipeline.scaler.transform(X)
    Y_pred, elapsed = predict_batch(X, pipeline)

    target_names = pipeline.target_names or [f"y{l + 1}" for l in range(pipeline.n_targets)]
    df_pred = pd.DataFrame(Y_pred, columns=target_names)
    df_pred["assigned_cluster"] = pipeline.assign(X)
    dir_name = os.path.dirname(args.out)
    if dir_name:
        os.makedirs(dir_name, exist_ok=True)
    df_pred.to_csv(args.out, index=False, float_format="%.17g")
    print(f"predicted: {len(Y_pred)} samples in {elapsed:.4f} s, saved: {args.out}")

    if len(header) > n_features:
        Y_true = values[:, n_features:]
        print(f"RMSE: {rmse(Y_true, Y_pred):.6g}, R2: {r2(Y_true, Y_pred):.6g}")
    return EXIT_SUCCESS


def _grid_config(args) -> GridConfig:
    cfg = overwrite_configs(cfg_grid_defaults, load_json_config(args.config) if args.config else None, config_name="grid")
    cfg = overwrite_configs(cfg, args.grid, config_name="grid")
    dict_flags = {
        "data_path": args.data,
        "n_targets": args.n_targets,
        "seed": args.seed,
        "threads": args.threads,
        "subsample_silhouette": args.subsample_silhouette
    }
    cfg = overwrite_configs(cfg, {key: value for key, value in dict_flags.items() if value is not None}, config_name="grid")
    return GridConfig.from_dict(cfg)


def command_grid(args) -> int:
    if args.repeats < 1:
        raise UsageError(f"`--repeats` must be positive: {args.repeats}")
    grid_config = _grid_config(args)
    verbose = not args.quiet

    for repeat in range(args.repeats):
        cfg = GridConfig.from_dict({**grid_config.to_dict(), "seed": grid_config.seed + repeat})
        out_dir = args.out_dir if args.repeats == 1 else os.path.join(args.out_dir, f"repeat_{repeat:02d}")
        os.makedirs(out_dir, exist_ok=True)
        with io.open(os.path.join(out_dir, "grid_config.json"), mode="w") as ofs:
            json.dump(cfg.to_dict(), ofs, indent=2)

        trainset, testset = prepare_datasets(cfg, verbose=verbose)
        Y_test = testset.targets
        upper_bound = rmse(Y_test, np.tile(Y_test.mean(axis=0), (len(Y_test), 1)))

        records = run_grid(cfg, verbose=verbose, datasets=(trainset, testset))
        path_records = os.path.join(out_dir, "records.csv")
        save_records(records, path_records)

        save_report_context(out_dir, rui_weights=cfg.rui_weights, rmse_upper_bound=upper_bound, contended=cfg.threads > 1)
        bundle = report_from_directory(out_dir)
        write_report(bundle, out_dir)
        if verbose:
            print(format_report(bundle))
        print(f"saved: {path_records}")
    return EXIT_SUCCESS


def command_rui(args) -> int:
    weights = _parse_float_list(args.weights, "weights")
    columns = _parse_columns(args.columns)
    if len(weights) != len(columns):
        raise UsageError(f"number of weights {len(weights)} differs from number of columns {len(columns)}")
    if not os.path.exists(args.metrics):
        raise IOError(f"metrics file not found: {args.metrics}")

    df = pd.read_csv(args.metrics)
    n_rows = len(df)
    if "status" in df.columns:
        df = df[df["status"].fillna("ok") == "ok"]
    df = df.dropna(subset=[name for name, _ in columns if name in df.columns]).reset_index(drop=True)
    if len(df) < n_rows:
        print(f"excluded {n_rows - len(df)} row(s) that are failed or lack a metric (e.g. baselines).", file=sys.stderr)

    table = RuiTable.from_dataframe(df, columns=columns, weights=weights)
    df_ranked = rank_table(table, local=args.local)
    print(df_ranked.to_string(index=False))
    return EXIT_SUCCESS


_COMMANDS = {
    "generate": command_generate,
    "train": command_train,
    "predict": command_predict,
    "grid": command_grid,
    "rui": command_rui
}


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return EXIT_SUCCESS if not e.code else EXIT_USAGE

    pprint("==== arguments ===")
    pprint(vars(args), compact=True)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
