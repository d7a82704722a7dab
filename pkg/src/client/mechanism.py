"""
Client-side pipeline: clip, Sign-Gaussian randomization, bit encoding, sharing.

Bits are the internal representation (bit 1 means sign +1). The secure XOR used for
Hamming distances needs {0, 1} operands, so signs only appear at the edges.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import ndtr

from src.exceptions import DomainError
from src.ring.field import DEFAULT_MODULUS
from src.ring.sharing import RingSampler, ShareVector, split


@dataclass(frozen=True, eq=False)
class SignUpdate:
    """A client's randomized update as a bit vector."""

    bits: np.ndarray
    # Harness bookkeeping only; never part of what a client transmits.
    client_hint: int | None = None
    sigma: float | None = None

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or not np.isin(bits, (0, 1)).all():
            raise DomainError("SignUpdate bits must be a 1-D vector of 0/1")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def signs(self) -> np.ndarray:
        return bits_to_signs(self.bits)


def bits_to_signs(bits: Any) -> np.ndarray:
    return 2 * np.asarray(bits, dtype=np.int64) - 1


def signs_to_bits(signs: Any) -> np.ndarray:
    s = np.asarray(signs, dtype=np.int64)
    if not np.isin(s, (-1, 1)).all():
        raise DomainError("Sign vectors must contain only -1 and +1")
    return ((s + 1) // 2).astype(np.uint8)


def sign_of(values: Any) -> np.ndarray:
    """Two-valued sign with sign(0) = +1."""
    return np.where(np.asarray(values) >= 0, 1, -1).astype(np.int64)


def clip(g: Any, bound: float) -> np.ndarray:
    """Clamp every coordinate into [-bound, bound]."""
    if bound <= 0:
        raise DomainError(f"Clip bound must be positive, got {bound}")
    arr = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Gradient contains non-finite values")
    return np.clip(arr, -bound, bound)


def sign_gaussian(
    g: Any,
    sigma: float,
    rng: np.random.Generator,
    client_hint: int | None = None,
) -> SignUpdate:
    """
    Add N(0, sigma^2) noise per coordinate and keep only the sign.

    bit_j = 1 iff g_j + noise_j >= 0, so an exact zero maps to +1.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    arr = np.asarray(g, dtype=np.float64)
    noisy = arr + rng.normal(0.0, sigma, size=arr.shape)
    return SignUpdate(bits=(noisy >= 0).astype(np.uint8), client_hint=client_hint, sigma=sigma)


def flip_probability(g: Any, sigma: float) -> Any:
    """Phi(-|g| / sigma): chance the noise flips the sign of g."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return ndtr(-np.abs(g) / sigma)


def attenuation(g: Any, sigma: float) -> Any:
    """kappa = 2 * Phi(|g| / sigma) - 1, so that E[transmitted sign] = kappa * sign(g)."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return 2.0 * ndtr(np.abs(g) / sigma) - 1.0


def encode_and_split(
    update: SignUpdate,
    rng: RingSampler,
    modulus: int = DEFAULT_MODULUS,
) -> tuple[ShareVector, ShareVector]:
    """Share the update's bits as ring elements 0/1."""
    return split(np.asarray(update.bits, dtype=np.int64), rng, modulus)
