"""
Plaintext RAIN aggregation.

Distances to the reference direction, a median + MAD threshold, ReLU trust weights
and the weighted or sign aggregate. The MPC path must reproduce the sign mode of
this module bit for bit, so the count-scale threshold lives here and is shared.
"""

import math
from collections.abc import Sequence
from typing import Any

import numpy as np
import structlog

from src.aggregation.models import AggregationOutcome, ReferenceDirection, WeightResult
from src.client.mechanism import SignUpdate, sign_of
from src.client.params import C_MAD, OutputMode
from src.exceptions import DomainError

logger = structlog.get_logger()


def _as_signs(values: Any) -> np.ndarray:
    if isinstance(values, ReferenceDirection):
        return np.asarray(values.signs, dtype=np.int64)
    if isinstance(values, SignUpdate):
        return values.signs
    arr = np.asarray(values, dtype=np.int64)
    if not np.isin(arr, (-1, 1)).all():
        raise DomainError("Sign vectors must contain only -1 and +1")
    return arr


def _as_sign_matrix(updates: Any) -> np.ndarray:
    if isinstance(updates, np.ndarray):
        matrix = _as_signs(updates)
    else:
        matrix = np.stack([_as_signs(u) for u in updates]) if len(updates) else np.zeros((0, 0))
    if matrix.ndim != 2:
        raise DomainError("Updates must form a K x d matrix")
    return matrix.astype(np.int64)


def hamming_count(b: Any, r: Any) -> int:
    """Number of coordinates where two sign vectors disagree."""
    b_signs, r_signs = _as_signs(b), _as_signs(r)
    if b_signs.shape != r_signs.shape:
        raise DomainError(f"Length mismatch: {len(b_signs)} != {len(r_signs)}")
    return int(np.count_nonzero(b_signs != r_signs))


def hamming_normalized(b: Any, r: Any) -> float:
    """(d - b.r) / (2d), i.e. the fraction of disagreeing coordinates."""
    b_signs, r_signs = _as_signs(b), _as_signs(r)
    if b_signs.shape != r_signs.shape:
        raise DomainError(f"Length mismatch: {len(b_signs)} != {len(r_signs)}")
    d = len(b_signs)
    if d < 1:
        raise DomainError("Sign vectors must be non-empty")
    return (d - int(np.dot(b_signs, r_signs))) / (2 * d)


def median_mad(values: Sequence[float] | np.ndarray) -> tuple[float, float]:
    """Median and median absolute deviation; even lengths average the middle pair."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise DomainError("Cannot take the median of an empty list")
    med = float(np.median(arr))
    mad = float(np.median(np.abs(arr - med)))
    return med, mad


def robust_threshold(
    distances: Sequence[float] | np.ndarray,
    lambda_mad: float,
    c_mad: float = C_MAD,
) -> float:
    """tau = median + c_mad * lambda_mad * MAD."""
    med, mad = median_mad(distances)
    return med + c_mad * lambda_mad * mad


def count_threshold(counts: Sequence[int] | np.ndarray, lambda_mad: float) -> int:
    """Threshold on the Hamming-count scale, rounded half up to an integer."""
    return int(math.floor(robust_threshold(counts, lambda_mad) + 0.5))


def relu_weights(distances: Sequence[float] | np.ndarray, tau: float) -> WeightResult:
    """alpha_i = max(0, tau - d_i) / sum_j max(0, tau - d_j); all zeros when nothing is trusted."""
    if not math.isfinite(tau):
        raise DomainError(f"Threshold must be finite, got {tau}")
    d = np.asarray(distances, dtype=np.float64)
    raw = np.maximum(0.0, tau - d)
    mass = float(raw.sum())
    if mass <= 0.0:
        return WeightResult(weights=np.zeros_like(raw), raw=raw, no_trusted_updates=True)
    return WeightResult(weights=raw / mass, raw=raw)


def aggregate(updates: Any, weights: Any, mode: OutputMode) -> np.ndarray:
    """
    Combine sign vectors.

    Weighted mode returns sum_i alpha_i * b_i (zeros if every weight is zero). Sign mode
    returns sign(sum_i w_i * b_i) with sign(0) = +1 and rejects an all-zero weight vector.
    Sums are accumulated in client index order.
    """
    matrix = _as_sign_matrix(updates)
    w = np.asarray(weights)
    if matrix.shape[0] != len(w):
        raise DomainError(f"{matrix.shape[0]} updates but {len(w)} weights")
    if matrix.shape[0] == 0:
        raise DomainError("No updates to aggregate")

    integral = np.issubdtype(w.dtype, np.integer)
    acc = np.zeros(matrix.shape[1], dtype=np.int64 if integral else np.float64)
    for i in range(matrix.shape[0]):
        acc = acc + w[i] * matrix[i]

    if mode is OutputMode.WEIGHTED:
        return acc.astype(np.float64)
    if not np.any(w > 0):
        raise DomainError("No trusted updates: every weight is zero")
    return sign_of(acc)


def model_update(w: Any, g_agg: Any, lr: float) -> np.ndarray:
    """w - lr * g_agg."""
    if lr <= 0:
        raise DomainError(f"Learning rate must be positive, got {lr}")
    w_arr = np.asarray(w, dtype=np.float64)
    g_arr = np.asarray(g_agg, dtype=np.float64)
    if w_arr.shape != g_arr.shape:
        raise DomainError(f"Dimension mismatch: {w_arr.shape} != {g_arr.shape}")
    return w_arr - lr * g_arr


class RainAggregator:
    """
    Runs the full plaintext aggregation for one round.

    Weighted mode works on normalized distances; sign mode works on Hamming counts with
    an integer threshold and unnormalized integer weights, exactly as the MPC path does.
    """

    def __init__(self, lambda_mad: float, output_mode: OutputMode):
        self.lambda_mad = lambda_mad
        self.output_mode = output_mode

    def aggregate(self, updates: Any, reference: ReferenceDirection) -> AggregationOutcome:
        matrix = _as_sign_matrix(updates)
        r = _as_signs(reference)
        if matrix.shape[1] != len(r):
            raise DomainError(f"Updates have d={matrix.shape[1]}, reference has d={len(r)}")
        d = len(r)
        counts = np.count_nonzero(matrix != r, axis=1).astype(np.int64)
        distances = counts / d

        if self.output_mode is OutputMode.SIGN:
            tau_int = count_threshold(counts, self.lambda_mad)
            raw = np.maximum(0, tau_int - counts).astype(np.int64)
            mass = int(raw.sum())
            alpha = raw / mass if mass > 0 else np.zeros(len(raw))
            no_trust = mass == 0
            direction = np.ones(d, dtype=np.int64) if no_trust else aggregate(matrix, raw, OutputMode.SIGN)
            tau: float = float(tau_int)
        else:
            tau = robust_threshold(distances, self.lambda_mad)
            result = relu_weights(distances, tau)
            raw, alpha, no_trust = result.raw, result.weights, result.no_trusted_updates
            direction = aggregate(matrix, alpha, OutputMode.WEIGHTED)

        if no_trust:
            logger.warning("No trusted updates", tau=tau, num_clients=len(counts))

        return AggregationOutcome(
            direction=direction,
            distances=distances,
            hamming_counts=counts,
            tau=tau,
            weights=np.asarray(alpha, dtype=np.float64),
            raw_weights=raw,
            no_trusted_updates=no_trust,
        )
