#!/usr/bin/env python
# -*- coding:utf-8 -*-

from .clustering import ClusterModel, KMeansConfig, OtKMeansConfig, DbscanConfig, MeanShiftConfig, AllNoiseError
from .clustering import fit_clusterer, build_cluster_config
from .gradient_boosting import GbConfig
from .regressor import Regressor, RegressorSpec, fit_regressor, regressor_from_dict
from .sinkhorn import sinkhorn, SinkhornConvergenceError
