#!/usr/bin/env python
# -*- coding:utf-8 -*-

from typing import List, Tuple
import io
import os
import csv
import math

import numpy as np

from ._base import Dataset

FLOAT_FORMAT = ".17g"


class DatasetFormatError(ValueError):

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def _parse_field(value: str, line_number: int, column: str) -> float:
    try:
        parsed = float(value)
    except ValueError:
        raise DatasetFormatError(f"non-numeric value in column `{column}`: {value!r}", line_number=line_number)
    if not math.isfinite(parsed):
        raise DatasetFormatError(f"non-finite value in column `{column}`: {value!r}", line_number=line_number)
    return parsed


def read_csv_table(path: str, min_columns: int = 1) -> Tuple[List[str], np.ndarray]:
    """
    reads a comma-separated numeric table with header row.

    @return: (header, values of shape (n_rows, n_columns))
    """
    if not os.path.exists(path):
        raise IOError(f"invalid path specified: {path}")

    with io.open(path, mode="r", encoding="utf-8", newline="") as ifs:
        reader = csv.reader(ifs)
        try:
            header = [name.strip() for name in next(reader)]
        except StopIteration:
            raise DatasetFormatError("header row is missing.", line_number=1)

        n_columns = len(header)
        if n_columns < min_columns:
            raise ValueError(f"at least {min_columns} column(s) are required: {n_columns}")

        lst_rows: List[List[float]] = []
        for row in reader:
            line_number = reader.line_num
            if len(row) == 0 or all(field.strip() == "" for field in row):
                continue
            if len(row) != n_columns:
                raise DatasetFormatError(f"expected {n_columns} fields, got {len(row)}", line_number=line_number)
            lst_rows.append([_parse_field(field.strip(), line_number, column) for field, column in zip(row, header)])

    if len(lst_rows) == 0:
        raise DatasetFormatError("no data rows.", line_number=2)

    return header, np.array(lst_rows, dtype=np.float64)


def load_csv(path: str, n_targets: int) -> Dataset:
    """
    reads a comma-separated file with header row. the trailing `n_targets` columns become targets.

    :param path: path to the csv file (UTF-8).
    :param n_targets: number of target columns L.
    """
    if n_targets < 1:
        raise ValueError(f"`n_targets` must be positive: {n_targets}")
    header, values = read_csv_table(path, min_columns=n_targets + 1)
    n_columns = len(header)
    n_features = n_columns - n_targets
    return Dataset(features=values[:, :n_features], targets=values[:, n_features:],
                   feature_names=header[:n_features], target_names=header[n_features:],
                   description=f"loaded from {path}")


def save_csv(dataset: Dataset, path: str):
    """writes features then targets with round-trip-safe float formatting."""
    path_dir = os.path.dirname(path)
    if path_dir and not os.path.exists(path_dir):
        os.makedirs(path_dir)

    header = list(dataset.feature_names) + list(dataset.target_names)
    values = np.hstack([dataset.features, dataset.targets])
    with io.open(path, mode="w", encoding="utf-8", newline="") as ofs:
        writer = csv.writer(ofs, lineterminator="\n")
        writer.writerow(header)
        for row in values:
            writer.writerow([format(float(v), FLOAT_FORMAT) for v in row])
