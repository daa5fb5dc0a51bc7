#!/usr/bin/env python
# -*- coding:utf-8 -*-

from ._base import Dataset
from .io import load_csv, save_csv, read_csv_table, DatasetFormatError
from .synthetic import SyntheticConfig, generate_synthetic
from .preprocessing import SplitSpec, split, StandardScaler, fit_scaler, apply_scaler
