"""Contrast aggregators with no robustness: mean, coordinate median, majority sign."""

from typing import Any

import numpy as np

from src.aggregation.models import BaselineKind
from src.client.mechanism import sign_of
from src.exceptions import DomainError


def baseline_aggregate(updates: Any, kind: BaselineKind) -> np.ndarray:
    """
    Aggregate a K x d stack of updates.

    Args:
        updates: Real-valued updates (mean, coord_median) or sign vectors (majority_sign)
        kind: Which baseline to apply

    Returns:
        Aggregated length-d vector
    """
    matrix = np.asarray(updates, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.shape[0] == 0:
        raise DomainError("Baseline aggregation needs at least one update")

    if kind is BaselineKind.MEAN:
        return matrix.mean(axis=0)
    if kind is BaselineKind.COORD_MEDIAN:
        return np.median(matrix, axis=0)
    if kind is BaselineKind.MAJORITY_SIGN:
        return sign_of(matrix.sum(axis=0)).astype(np.float64)
    raise DomainError(f"Unknown baseline {kind}")
