#!/usr/bin/env python
# -*- coding:utf-8 -*-

from .utils import nullable_string, nullable_json_loads, load_json_config, overwrite_configs
