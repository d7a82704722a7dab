"""Sign-vector identities relating Hamming distance, cosine and expected aggregate sign."""

from typing import Any

import numpy as np

from src.exceptions import DomainError


def cosine_from_hamming(hd: int, d: int) -> float:
    """Cosine between two sign vectors that disagree on hd of d coordinates: 1 - 2*hd/d."""
    if d < 1:
        raise DomainError(f"Dimension must be positive, got {d}")
    if hd < 0 or hd > d:
        raise DomainError(f"Hamming count {hd} outside [0, {d}]")
    return 1.0 - 2.0 * hd / d


def sign_cosine(a: Any, b: Any) -> float:
    """Dot-product cosine of two {-1, +1} vectors."""
    a_arr = np.asarray(a, dtype=np.int64)
    b_arr = np.asarray(b, dtype=np.int64)
    if a_arr.shape != b_arr.shape:
        raise DomainError(f"Shape mismatch: {a_arr.shape} != {b_arr.shape}")
    return float(np.dot(a_arr, b_arr)) / len(a_arr)


def expected_aggregate_sign(p_correct: Any, true_sign: Any) -> np.ndarray:
    """E[aggregated sign_j] = (2 p_j - 1) * sign(g*_j) for per-coordinate agreement p_j."""
    p = np.asarray(p_correct, dtype=np.float64)
    if ((p < 0) | (p > 1)).any():
        raise DomainError("Agreement probabilities must lie in [0, 1]")
    return (2.0 * p - 1.0) * np.asarray(true_sign, dtype=np.float64)
