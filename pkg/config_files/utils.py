#!/usr/bin/env python
# -*- coding:utf-8 -*-

from typing import Dict, Any, Optional
import os, io, json, copy

import pydash


def nullable_string(value):
    return None if not value else value


def nullable_json_loads(value):
    value = value.replace("'", "\"") if isinstance(value, str) else value
    return {} if not value else json.loads(value)


def load_json_config(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise IOError(f"config file not found: {path}")
    with io.open(path, mode="r") as ifs:
        return json.load(ifs)


def overwrite_configs(cfg_default: Dict[str, Any], cfg_input: Optional[Dict[str, Any]], config_name: str = "cfg",
                      verbose: bool = True) -> Dict[str, Any]:
    """
    returns a copy of the defaults overwritten by the input. nested dicts are merged key by key;
    dotted keys (e.g. "regressor_params.gb.n_estimators") address nested entries.
    every changed value is printed as `config_name.key: old -> new`.
    """
    cfg = copy.deepcopy(cfg_default)
    if not cfg_input:
        return cfg

    def _merge(path: str, value):
        default_value = pydash.get(cfg, path)
        if isinstance(value, dict) and isinstance(default_value, dict):
            for key, child in value.items():
                _merge(f"{path}.{key}", child)
            return
        if verbose and default_value != value:
            print(f"{config_name}.{path}: {default_value} -> {value}")
        pydash.set_(cfg, path, value)

    for key, value in cfg_input.items():
        _merge(key, value)
    return cfg
