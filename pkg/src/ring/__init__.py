"""
Ring arithmetic layer.

Prime-ring vectors, a seeded ChaCha20 PRG, additive sharing and Beaver multiplication.
The offline dealer lives in src.ring.dealer and is imported from there directly.
"""

from src.ring.beaver import BeaverTriple, Opener, local_open, mul_shares
from src.ring.field import (
    DEFAULT_MODULUS,
    ELEMENT_BYTES,
    MERSENNE_61,
    SMALL_TEST_MODULUS,
    PrimeRing,
)
from src.ring.prg import Prg, seed_from_int
from src.ring.sharing import (
    RingSampler,
    SharedVector,
    ShareVector,
    concat_shared,
    constant_shared,
    negate,
    reconstruct,
    share_pair,
    split,
)

__all__ = [
    "BeaverTriple",
    "Opener",
    "local_open",
    "mul_shares",
    "DEFAULT_MODULUS",
    "ELEMENT_BYTES",
    "MERSENNE_61",
    "SMALL_TEST_MODULUS",
    "PrimeRing",
    "Prg",
    "seed_from_int",
    "RingSampler",
    "SharedVector",
    "ShareVector",
    "concat_shared",
    "constant_shared",
    "negate",
    "reconstruct",
    "share_pair",
    "split",
]
