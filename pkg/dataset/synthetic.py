#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Synthetic stand-in for the scattering dataset: a mixture of Gaussian-like components in
# feature space, each component mapping the load vector to features through its own
# rotation and offset of a bounded nonlinear embedding. Within a component the map from loads to features
# is one-to-one; across components the rotations differ.

from typing import Tuple, Dict, Any
from dataclasses import dataclass, asdict
import io
import json

import numpy as np

from ._base import Dataset
from .utils import default_rng


@dataclass
class SyntheticConfig:
    n_samples: int = 20000
    n_components: int = 4
    d: int = 4
    L: int = 3
    noise_std: float = 0.01
    load_range: Tuple[float, float] = (0.0, 1000.0)
    component_separation: float = 4.0
    component_scale: float = 2.0
    seed: int = 0

    def __post_init__(self):
        self.load_range = tuple(float(v) for v in self.load_range)
        self.validate()

    def validate(self):
        for name in ("n_samples", "n_components", "d", "L"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"`{name}` must be a positive integer: {value}")
        if self.d < self.L:
            raise ValueError(f"`d` must not be smaller than `L`, otherwise features cannot determine the loads: {self.d} < {self.L}")
        if self.component_scale <= 0:
            raise ValueError(f"`component_scale` must be positive: {self.component_scale}")
        if self.noise_std < 0:
            raise ValueError(f"`noise_std` must be nonnegative: {self.noise_std}")
        if len(self.load_range) != 2 or not (self.load_range[0] < self.load_range[1]):
            raise ValueError(f"`load_range` must satisfy low < high: {self.load_range}")
        if self.n_components > self.n_samples:
            raise ValueError(f"`n_components` must not exceed `n_samples`: {self.n_components} > {self.n_samples}")
        if self.seed < 0:
            raise ValueError(f"`seed` must be unsigned: {self.seed}")

    def to_dict(self) -> Dict[str, Any]:
        ret = asdict(self)
        ret["load_range"] = list(self.load_range)
        return ret

    @classmethod
    def from_dict(cls, dict_config: Dict[str, Any]) -> "SyntheticConfig":
        return cls(**dict_config)

    @classmethod
    def from_json(cls, path: str) -> "SyntheticConfig":
        with io.open(path, mode="r", encoding="utf-8") as ifs:
            return cls.from_dict(json.load(ifs))


def _embed_loads(u: np.ndarray) -> np.ndarray:
    """
    bounded nonlinear embedding g(.) of normalized loads u in [0,1], applied per coordinate.
    every coordinate is a sine term plus a rational term with slope in [0.45, 1.8], so g is
    strictly increasing and one-to-one on [0,1].
    shape: (n, L) -> (n, L)
    """
    sine_terms = u + 0.6 * np.sin(2.5 * np.pi * u) / (2.5 * np.pi)
    rational_terms = 2.0 * u / (1.0 + u)
    return 0.5 * sine_terms + 0.5 * rational_terms


def _component_parameters(cfg: SyntheticConfig):
    rng = default_rng(cfg.seed, "synthetic-parameters")
    # every component rotates the embedding by its own orthonormal frame; full column rank keeps
    # the features one-to-one with the loads inside a component.
    mixing = np.empty((cfg.n_components, cfg.d, cfg.L), dtype=np.float64)
    for c in range(cfg.n_components):
        q, r = np.linalg.qr(rng.normal(size=(cfg.d, cfg.L)))
        mixing[c] = cfg.component_scale * q * np.sign(np.diag(r))

    # component offsets along orthogonal directions when possible, so that components are separated.
    if cfg.n_components <= cfg.d:
        q, _ = np.linalg.qr(rng.normal(size=(cfg.d, cfg.d)))
        directions = q[:, :cfg.n_components].T
    else:
        directions = rng.normal(size=(cfg.n_components, cfg.d))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    offsets = cfg.component_separation * directions
    return mixing, offsets


def generate_synthetic(cfg: SyntheticConfig) -> Dataset:
    """
    draws (component, loads) pairs and computes features x = A_c g(y) + b_c + noise.
    a pure function of `cfg`: the same config returns bit-identical matrices.
    """
    cfg.validate()
    mixing, offsets = _component_parameters(cfg)

    rng = default_rng(cfg.seed, "synthetic-samples")
    components = rng.integers(low=0, high=cfg.n_components, size=cfg.n_samples)
    low, high = cfg.load_range
    targets = rng.uniform(low=low, high=high, size=(cfg.n_samples, cfg.L))
    noise = rng.normal(loc=0.0, scale=1.0, size=(cfg.n_samples, cfg.d)) * cfg.noise_std

    embedded = _embed_loads((targets - low) / (high - low))
    features = np.einsum("nij,nj->ni", mixing[components], embedded) + offsets[components] + noise

    return Dataset(features=features, targets=targets,
                   feature_names=[f"s{idx+1}" for idx in range(cfg.d)],
                   target_names=[f"load{idx+1}" for idx in range(cfg.L)],
                   description=f"synthetic mixture: {cfg.n_components} components, seed={cfg.seed}")
