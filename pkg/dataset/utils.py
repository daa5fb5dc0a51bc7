#!/usr/bin/env python
# -*- coding:utf-8 -*-

from typing import Optional, Sequence, Union, Any, List
import zlib

import numpy as np

Array_like = Union[np.ndarray, Sequence[Sequence[float]]]


def as_float_matrix(obj: Array_like, name: str = "matrix", allow_empty: bool = False) -> np.ndarray:
    """
    convert input to 2D float64 array and verify that every value is finite.

    @param obj: 2D array-like. 1D input is interpreted as a single column.
    @param name: name used in error messages.
    @param allow_empty: accept zero rows.
    """
    array = np.asarray(obj, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    if array.ndim != 2:
        raise ValueError(f"`{name}` must be 2-dimensional: ndim={array.ndim}")
    if (array.shape[0] == 0) and (not allow_empty):
        raise ValueError(f"`{name}` must have at least one row.")
    if not np.all(np.isfinite(array)):
        n_bad = int(np.sum(~np.isfinite(array)))
        raise ValueError(f"`{name}` contains {n_bad} non-finite value(s).")
    return array


def as_float_vector(obj: Array_like, name: str = "vector") -> np.ndarray:
    array = np.asarray(obj, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(array)):
        raise ValueError(f"`{name}` contains non-finite value(s).")
    return array


def freeze(array: np.ndarray) -> np.ndarray:
    """returns read-only view. used for the immutable containers."""
    view = array.view()
    view.flags.writeable = False
    return view


def check_n_features(X: np.ndarray, n_features: int, name: str = "X"):
    if X.shape[1] != n_features:
        raise ValueError(f"feature dimension mismatch in `{name}`: expected {n_features}, got {X.shape[1]}")


def stable_hash(text: str) -> int:
    # python's hash() is salted per process; crc32 is not.
    return zlib.crc32(text.encode("utf-8"))


def derive_seed(seed: int, *keys: Any) -> int:
    """
    derives a child seed from a global seed and arbitrary keys (strings or integers).
    identical inputs always give the identical child seed regardless of call order.
    """
    entropy: List[int] = [int(seed)]
    for key in keys:
        entropy.append(stable_hash(key) if isinstance(key, str) else int(key))
    sequence = np.random.SeedSequence(entropy)
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def default_rng(seed: Optional[int], *keys: Any) -> np.random.Generator:
    if seed is None:
        seed = 0
    if len(keys) == 0:
        return np.random.default_rng(int(seed))
    return np.random.default_rng(derive_seed(seed, *keys))
