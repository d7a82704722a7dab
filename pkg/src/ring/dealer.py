"""
Offline correlated-randomness dealer.

Both servers hold the round seed and expand it with the PRG, so every bundle is a pure
function of (seed, K, d, round, p). Triples are grouped by the role that consumes them:

- xor: K triples of length d (secure Hamming distance)
- relu: 1 triple of length K (trust weights)
- wsum: K triples of length d (weighted sum)
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import structlog

from src.exceptions import DomainError, ProtocolError
from src.integrity.mac import MacKey, derive_round_key
from src.ring.beaver import BeaverTriple
from src.ring.codec import pack_elements, pack_u32, pack_u64
from src.ring.field import DEFAULT_MODULUS, PrimeRing
from src.ring.prg import Prg
from src.ring.sharing import SharedVector, share_pair

logger = structlog.get_logger()

BUNDLE_MAGIC = b"RAINBNDL"
BUNDLE_VERSION = 1


class TripleRole(str, Enum):
    XOR = "xor"
    RELU = "relu"
    WSUM = "wsum"


def compose_permutations(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """
    Single permutation equal to applying `first`, then `second`.

    Permutations act as out[i] = in[perm[i]].
    """
    if len(first) != len(second):
        raise DomainError("Permutations differ in length")
    return np.asarray(first)[np.asarray(second)]


def is_bijection(perm: np.ndarray, n: int) -> bool:
    return len(perm) == n and np.array_equal(np.sort(perm), np.arange(n))


def triple_layout(num_clients: int, dimension: int) -> dict[TripleRole, list[int]]:
    """Triple lengths per role for a (K, d) round."""
    return {
        TripleRole.XOR: [dimension] * num_clients,
        TripleRole.RELU: [num_clients],
        TripleRole.WSUM: [dimension] * num_clients,
    }


@dataclass(eq=False)
class DealerBundle:
    """Everything the two servers need for one round, expanded from the shared seed."""

    seed: bytes
    round_index: int
    num_clients: int
    dimension: int
    modulus: int
    pi_0: np.ndarray
    pi_1: np.ndarray
    permutation: np.ndarray
    masks: tuple[np.ndarray, np.ndarray]
    triples: dict[TripleRole, list[BeaverTriple]]
    mac_key: MacKey

    def prg(self, label: str) -> Prg:
        """Round-scoped PRG for gate resharing and server-side sharings."""
        return Prg(self.seed, self.round_index, label)

    def to_bytes(self) -> bytes:
        """
        Serialize the bundle.

        Header: magic, u32 version, u64 round, u32 K, u32 d, u64 p. Body: pi_0, pi_1, pi,
        r_0 rows, r_1 rows, triples by role (xor, relu, wsum) each as x0 x1 y0 y1 z0 z1,
        then k, k0, k1. Every vector is length-prefixed.
        """
        parts = [
            BUNDLE_MAGIC,
            pack_u32(BUNDLE_VERSION),
            pack_u64(self.round_index),
            pack_u32(self.num_clients),
            pack_u32(self.dimension),
            pack_u64(self.modulus),
            pack_elements(self.pi_0),
            pack_elements(self.pi_1),
            pack_elements(self.permutation),
        ]
        for party in (0, 1):
            parts.extend(pack_elements(row) for row in self.masks[party])
        for role in TripleRole:
            for triple in self.triples[role]:
                for shared in (triple.x, triple.y, triple.z):
                    parts.append(pack_elements(shared.s0.elems))
                    parts.append(pack_elements(shared.s1.elems))
        parts.append(pack_elements(self.mac_key.key))
        parts.append(pack_elements(self.mac_key.key_shares.s0.elems))
        parts.append(pack_elements(self.mac_key.key_shares.s1.elems))
        return b"".join(parts)


def _prefix(triple: BeaverTriple, length: int) -> BeaverTriple:
    def cut(shared: SharedVector) -> SharedVector:
        return SharedVector(
            shared.s0.with_elems(shared.s0.elems[:length]),
            shared.s1.with_elems(shared.s1.elems[:length]),
        )

    return BeaverTriple(x=cut(triple.x), y=cut(triple.y), z=cut(triple.z))


class TripleDispenser:
    """Hands out a bundle's triples per role, in order, each at most once."""

    def __init__(self, triples: dict[TripleRole, list[BeaverTriple]]):
        self._pools = triples
        self._cursor = {role: 0 for role in triples}
        self._issued: list[BeaverTriple] = []

    def take(self, role: TripleRole, length: int) -> BeaverTriple:
        """
        Next unused triple of a role.

        A shorter request is served by a prefix of the next triple, which retires the
        whole triple (the relu triple when slots were dropped).
        """
        pool = self._pools.get(role, [])
        cursor = self._cursor.get(role, 0)
        while cursor < len(pool) and pool[cursor].consumed:
            cursor += 1
        if cursor >= len(pool):
            raise ProtocolError(f"Beaver triples exhausted for role {role.value}")
        triple = pool[cursor]
        self._cursor[role] = cursor + 1
        if length > len(triple):
            raise ProtocolError(f"Next {role.value} triple has length {len(triple)}, need {length}")
        if length < len(triple):
            triple.consume()
            triple = _prefix(triple, length)
        self._issued.append(triple)
        return triple

    def consumed_lengths(self) -> list[int]:
        """Lengths of issued triples that have actually been multiplied with."""
        return [len(t) for t in self._issued if t.consumed]

    def remaining(self, role: TripleRole) -> int:
        return sum(1 for t in self._pools.get(role, []) if not t.consumed)


def _make_triple(prg: Prg, length: int, ring: PrimeRing) -> BeaverTriple:
    p = ring.modulus
    x = prg.ring_vector(length, p)
    y = prg.ring_vector(length, p)
    z = ring.mul(x, y)
    return BeaverTriple(
        x=share_pair(x, prg, p),
        y=share_pair(y, prg, p),
        z=share_pair(z, prg, p),
    )


def dealer_setup(
    seed: bytes,
    num_clients: int,
    dimension: int,
    round_index: int,
    modulus: int = DEFAULT_MODULUS,
) -> DealerBundle:
    """
    Expand one round's correlated randomness from the shared seed.

    Args:
        seed: Deployment-provided seed shared by both servers
        num_clients: K, number of client slots
        dimension: d, length of each update
        round_index: Round number, bound into every derived stream
        modulus: Ring modulus p

    Returns:
        DealerBundle with permutations, zero-sum masks, triples and the round MAC key
    """
    if num_clients < 1:
        raise DomainError(f"K must be at least 1, got {num_clients}")
    if dimension < 1:
        raise DomainError(f"d must be at least 1, got {dimension}")
    ring = PrimeRing(modulus)

    pi_0 = Prg(seed, round_index, "shuffle/perm/0").permutation(num_clients)
    pi_1 = Prg(seed, round_index, "shuffle/perm/1").permutation(num_clients)

    r0 = Prg(seed, round_index, "shuffle/masks").ring_vector(num_clients * dimension, modulus)
    r0 = r0.reshape(num_clients, dimension)
    r1 = ring.neg(r0)

    triples: dict[TripleRole, list[BeaverTriple]] = {}
    for role, lengths in triple_layout(num_clients, dimension).items():
        prg = Prg(seed, round_index, f"beaver/{role.value}")
        triples[role] = [_make_triple(prg, n, ring) for n in lengths]

    bundle = DealerBundle(
        seed=seed,
        round_index=round_index,
        num_clients=num_clients,
        dimension=dimension,
        modulus=modulus,
        pi_0=pi_0,
        pi_1=pi_1,
        permutation=compose_permutations(pi_0, pi_1),
        masks=(r0, r1),
        triples=triples,
        mac_key=derive_round_key(seed, round_index, dimension, modulus),
    )
    logger.debug(
        "Dealer bundle generated",
        round=round_index,
        num_clients=num_clients,
        dimension=dimension,
    )
    return bundle


def shared_from_bundle(bundle: DealerBundle, values: np.ndarray, label: str) -> SharedVector:
    """Share a server-side public value (e.g. the reference direction) with bundle randomness."""
    return share_pair(np.asarray(values, dtype=np.int64), bundle.prg(label), bundle.modulus)
