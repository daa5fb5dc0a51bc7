#!/usr/bin/env python
# -*- coding:utf-8 -*-

from .grid import ExperimentRecord, GridConfig, run_grid, save_records, load_records
from .report import ReportBundle, report, write_report, save_report_context, report_from_directory
