"""Argument checks shared by the estimator and the harness."""
from __future__ import annotations

import math

import numpy as np
from sklearn.utils.validation import check_array


def check_observations(X, n_features: int) -> np.ndarray:
    """2-d float64 observations with ``n_features`` columns; a single 1-d state is promoted."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    return X


def check_positive(x, name: str) -> float:
    x = float(x)
    if math.isnan(x) or x <= 0.0:
        raise ValueError(f"{name} must be positive, got {x}")
    return x


def check_unit_interval(x, name: str) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {x}")
    return x
