"""Two-party additive secret sharing over Z_p."""

from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from src.exceptions import DomainError
from src.ring.field import DEFAULT_MODULUS, PrimeRing, as_int_array


class RingSampler(Protocol):
    """Anything that can draw uniform ring vectors (a Prg, or a fixed stub in tests)."""

    def ring_vector(self, n: int, modulus: int) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class ShareVector:
    """One party's additive share of a length-d ring vector."""

    party: int
    elems: np.ndarray
    modulus: int = DEFAULT_MODULUS

    def __post_init__(self) -> None:
        if self.party not in (0, 1):
            raise DomainError(f"Party id must be 0 or 1, got {self.party}")

    def __len__(self) -> int:
        return len(self.elems)

    @property
    def ring(self) -> PrimeRing:
        return PrimeRing(self.modulus)

    def with_elems(self, elems: np.ndarray) -> "ShareVector":
        return ShareVector(party=self.party, elems=elems % self.modulus, modulus=self.modulus)


@dataclass(frozen=True, eq=False)
class SharedVector:
    """
    Both parties' shares of one vector.

    The simulator holds both halves side by side. Every method here is a local
    operation that each party applies to its own half; nothing is reconstructed.
    """

    s0: ShareVector
    s1: ShareVector

    def __post_init__(self) -> None:
        if self.s0.party != 0 or self.s1.party != 1:
            raise DomainError("SharedVector expects (party 0, party 1) shares")
        if len(self.s0) != len(self.s1):
            raise DomainError(f"Share length mismatch: {len(self.s0)} != {len(self.s1)}")
        if self.s0.modulus != self.s1.modulus:
            raise DomainError("Shares come from different rings")

    def __len__(self) -> int:
        return len(self.s0)

    @property
    def modulus(self) -> int:
        return self.s0.modulus

    def share(self, party: int) -> ShareVector:
        return self.s0 if party == 0 else self.s1

    def add(self, other: "SharedVector") -> "SharedVector":
        return SharedVector(
            self.s0.with_elems(self.s0.elems + other.s0.elems),
            self.s1.with_elems(self.s1.elems + other.s1.elems),
        )

    def sub(self, other: "SharedVector") -> "SharedVector":
        return SharedVector(
            self.s0.with_elems(self.s0.elems - other.s0.elems),
            self.s1.with_elems(self.s1.elems - other.s1.elems),
        )

    def scale(self, c: int) -> "SharedVector":
        return SharedVector(self.s0.with_elems(self.s0.elems * c), self.s1.with_elems(self.s1.elems * c))

    def add_public(self, values: Any) -> "SharedVector":
        """Add a public vector or scalar; only party 0 folds it in."""
        if isinstance(values, np.ndarray):
            values = as_int_array(values)
        return SharedVector(self.s0.with_elems(self.s0.elems + values), self.s1)

    def broadcast(self, n: int) -> "SharedVector":
        """Repeat a length-1 sharing n times."""
        if len(self) != 1:
            raise DomainError("Only length-1 sharings can be broadcast")
        return SharedVector(
            self.s0.with_elems(np.repeat(self.s0.elems, n).astype(object)),
            self.s1.with_elems(np.repeat(self.s1.elems, n).astype(object)),
        )

    def select(self, index: int) -> "SharedVector":
        """The length-1 sharing of entry `index`."""
        return SharedVector(
            self.s0.with_elems(self.s0.elems[index : index + 1]),
            self.s1.with_elems(self.s1.elems[index : index + 1]),
        )

    def total(self) -> "SharedVector":
        """Length-1 sharing of the sum of all entries."""
        return SharedVector(
            self.s0.with_elems(np.array([sum(self.s0.elems)], dtype=object)),
            self.s1.with_elems(np.array([sum(self.s1.elems)], dtype=object)),
        )

    def reconstruct(self) -> np.ndarray:
        return reconstruct(self.s0, self.s1)


def split(
    secret: Any,
    rng: RingSampler,
    modulus: int = DEFAULT_MODULUS,
) -> tuple[ShareVector, ShareVector]:
    """
    Split a ring vector into two additive shares.

    Args:
        secret: Entries in [0, p)
        rng: Source of the uniform share for party 0
        modulus: Ring modulus p

    Returns:
        (share for party 0, share for party 1) summing to secret mod p
    """
    ring = PrimeRing(modulus)
    values = ring.vector(secret)
    share0 = ring.vector(rng.ring_vector(len(values), modulus))
    share1 = ring.sub(values, share0)
    return ShareVector(0, share0, modulus), ShareVector(1, share1, modulus)


def share_pair(secret: Any, rng: RingSampler, modulus: int = DEFAULT_MODULUS) -> SharedVector:
    s0, s1 = split(secret, rng, modulus)
    return SharedVector(s0, s1)


def reconstruct(s0: ShareVector, s1: ShareVector) -> np.ndarray:
    """Elementwise (s0 + s1) mod p."""
    if s0.party == s1.party:
        raise DomainError(f"Both shares belong to party {s0.party}")
    if len(s0) != len(s1):
        raise DomainError(f"Share length mismatch: {len(s0)} != {len(s1)}")
    if s0.modulus != s1.modulus:
        raise DomainError("Shares come from different rings")
    return (s0.elems + s1.elems) % s0.modulus


def negate(share: ShareVector) -> ShareVector:
    """The opposite party's share that cancels `share` (reconstructs to zero)."""
    return ShareVector(party=1 - share.party, elems=(-share.elems) % share.modulus, modulus=share.modulus)


def constant_shared(values: Any, modulus: int = DEFAULT_MODULUS) -> SharedVector:
    """Trivial sharing of a public vector: party 0 holds it, party 1 holds zeros."""
    ring = PrimeRing(modulus)
    elems = ring.vector(values)
    return SharedVector(ShareVector(0, elems, modulus), ShareVector(1, ring.zeros(len(elems)), modulus))


def concat_shared(parts: list[SharedVector]) -> SharedVector:
    """Concatenate sharings entrywise (each party concatenates its own halves)."""
    if not parts:
        raise DomainError("Nothing to concatenate")
    modulus = parts[0].modulus
    s0 = np.concatenate([p.s0.elems for p in parts]).astype(object)
    s1 = np.concatenate([p.s1.elems for p in parts]).astype(object)
    return SharedVector(ShareVector(0, s0, modulus), ShareVector(1, s1, modulus))
