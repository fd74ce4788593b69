"""Argument checks shared by the estimator and the command line."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_scalar

MAX_N = 10**7


def check_n(n, name: str = "n") -> int:
    """Validate a system size ``1 <= n <= 10**7``."""
    return int(check_scalar(n, name, target_type=numbers.Integral, min_val=1, max_val=MAX_N))


def check_counts(k, n: int) -> np.ndarray:
    """Validate observed up-spin counts as a 1-d integer array in ``[0, n]``."""
    arr = np.asarray(k)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    arr = np.atleast_1d(arr)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a non-empty 1-d array of counts")
    if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
        raise ValueError("counts must be integers")
    arr = arr.astype(np.int64)
    if np.any(arr < 0) or np.any(arr > n):
        raise ValueError(f"counts must lie in [0, {n}]")
    return arr


def check_positive_int(v, name: str, min_val: int = 1) -> int:
    return int(check_scalar(v, name, target_type=numbers.Integral, min_val=min_val))


def check_seed(seed) -> int:
    seed = int(check_scalar(seed, "seed", target_type=numbers.Integral, min_val=0))
    if seed >= 2**64:
        raise ValueError("seed must fit in 64 bits")
    return seed
