"""
Carter-Wegman MAC over ring vectors.

A tag is the inner product t = <k, r> mod p with a per-round key k. Each client slot
carries one tag over its share pair; since the shares sum to the slot's payload,
<k, s0> + <k, s1> equals the tag of the payload, and any additive perturbation delta
goes unnoticed only if <k, delta> = 0 mod p.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from src.exceptions import DomainError, IntegrityError
from src.ring.field import DEFAULT_MODULUS, PrimeRing
from src.ring.prg import Prg
from src.ring.sharing import SharedVector, share_pair


class Verdict(str, Enum):
    """Outcome of a tag check."""

    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True, eq=False)
class MacKey:
    """Round key k_t with its additive shares. The full key stays inside the dealer and gates."""

    round_index: int
    key: np.ndarray
    key_shares: SharedVector

    def __post_init__(self) -> None:
        if not np.array_equal(self.key_shares.reconstruct(), self.key):
            raise IntegrityError("MAC key shares do not reconstruct to the key")

    @property
    def modulus(self) -> int:
        return self.key_shares.modulus

    @property
    def dimension(self) -> int:
        return len(self.key)

    def full(self) -> np.ndarray:
        """Reconstruct the key from its shares, as the verification gate does."""
        return self.key_shares.reconstruct()


@dataclass(frozen=True, eq=False)
class TaggedShare:
    """One shuffled slot as streamed: the re-masked share pair and its tag."""

    round_index: int
    position: int
    shares: SharedVector
    tag: int


def derive_round_key(
    seed: bytes,
    round_index: int,
    dimension: int,
    modulus: int = DEFAULT_MODULUS,
) -> MacKey:
    """Expand the round-indexed seed into k_t and its shares."""
    if dimension < 1:
        raise DomainError(f"MAC key dimension must be positive, got {dimension}")
    key = Prg(seed, round_index, "mac/key").ring_vector(dimension, modulus)
    shares = share_pair(key, Prg(seed, round_index, "mac/shares"), modulus)
    return MacKey(round_index=round_index, key=key, key_shares=shares)


def mac_tag(share: Any, key: Any, modulus: int = DEFAULT_MODULUS) -> int:
    """Inner product <key, share> mod p."""
    ring = PrimeRing(modulus)
    values = ring.vector(share)
    key_vec = key.full() if isinstance(key, MacKey) else ring.vector(key)
    return ring.dot(key_vec, values)


def slot_tag(shares: SharedVector, key: MacKey) -> int:
    """Honest tag of a slot: <k, s0> + <k, s1> mod p."""
    k = key.full()
    p = key.modulus
    return (mac_tag(shares.s0.elems, k, p) + mac_tag(shares.s1.elems, k, p)) % p


def mac_verify(tagged: TaggedShare, key: MacKey) -> Verdict:
    """Recompute the slot tag with the full key and compare it to the carried tag."""
    if len(tagged.shares) != key.dimension:
        return Verdict.REJECT
    return Verdict.ACCEPT if slot_tag(tagged.shares, key) == tagged.tag % key.modulus else Verdict.REJECT
