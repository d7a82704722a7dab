"""
Plaintext aggregation.

Hamming trust scoring, the median + MAD threshold, ReLU weights, weighted and sign
aggregates, and the contrast baselines. Serves as the oracle for the MPC path.
"""

from src.aggregation.baselines import baseline_aggregate
from src.aggregation.identities import cosine_from_hamming, expected_aggregate_sign, sign_cosine
from src.aggregation.models import (
    AggregationOutcome,
    BaselineKind,
    ReferenceDirection,
    ReferenceSource,
    TrustScore,
    WeightResult,
)
from src.aggregation.rain import (
    RainAggregator,
    aggregate,
    count_threshold,
    hamming_count,
    hamming_normalized,
    median_mad,
    model_update,
    relu_weights,
    robust_threshold,
)

__all__ = [
    "baseline_aggregate",
    "cosine_from_hamming",
    "expected_aggregate_sign",
    "sign_cosine",
    "AggregationOutcome",
    "BaselineKind",
    "ReferenceDirection",
    "ReferenceSource",
    "TrustScore",
    "WeightResult",
    "RainAggregator",
    "aggregate",
    "count_threshold",
    "hamming_count",
    "hamming_normalized",
    "median_mad",
    "model_update",
    "relu_weights",
    "robust_threshold",
]
