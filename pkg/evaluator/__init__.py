#!/usr/bin/env python
# -*- coding:utf-8 -*-
from .metrics import rmse, rmse_per_load, r2
from .silhouette import silhouette
from .rui import MetricColumn, RuiTable, RuiResult, normalize_column, rui, local_rui
