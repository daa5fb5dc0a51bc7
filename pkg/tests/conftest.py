#!/usr/bin/env python
# -*- coding:utf-8 -*-

import os, sys

import numpy as np
import pytest

# flat repository layout: packages are imported from the repository root.
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir)))

from dataset import Dataset, SyntheticConfig, generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_blobs():
    """two tight blobs in 2-D, 50 points each, centered at (0,0) and (10,10)."""
    generator = np.random.default_rng(7)
    blob_a = generator.normal(loc=0.0, scale=0.1, size=(50, 2))
    blob_b = generator.normal(loc=10.0, scale=0.1, size=(50, 2))
    return np.vstack([blob_a, blob_b])


@pytest.fixture
def small_synthetic() -> Dataset:
    cfg = SyntheticConfig(n_samples=400, n_components=3, d=4, L=3, seed=3)
    return generate_synthetic(cfg)
