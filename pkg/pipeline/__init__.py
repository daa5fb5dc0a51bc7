#!/usr/bin/env python
# -*- coding:utf-8 -*-

from .divide_and_conquer import TrainedPipeline, PredictionVector, ClusterSizeError
from .divide_and_conquer import train_divide_conquer, assign_to_cluster, predict_sample, predict_batch
from .divide_and_conquer import save_pipeline, load_pipeline
