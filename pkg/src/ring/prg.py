"""
Deterministic PRG keyed by seed, round and purpose label.

The key is HKDF-SHA256(seed, info=round || label) and the stream is ChaCha20 with a
zero nonce. Each (seed, round, label) triple owns an independent stream, which
domain-separates permutations, masks, triples, MAC keys and client randomness.
"""

import numpy as np
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from src.exceptions import DomainError
from src.ring.field import as_int_array

SEED_BYTES = 32
_NONCE = b"\x00" * 16


def seed_from_int(seed: int) -> bytes:
    """Expand a config-level integer seed into a 256-bit PRG seed."""
    if seed < 0:
        raise DomainError(f"Seed must be non-negative, got {seed}")
    return seed.to_bytes(SEED_BYTES, "little")


def _derive_key(seed: bytes, round_index: int, label: str) -> bytes:
    info = round_index.to_bytes(8, "little") + label.encode("utf-8")
    hkdf = HKDF(algorithm=hashes.SHA256(), length=32, salt=None, info=info)
    return hkdf.derive(seed)


class Prg:
    """ChaCha20 keystream with helpers for ring vectors, permutations and noise."""

    def __init__(self, seed: bytes, round_index: int = 0, label: str = ""):
        if len(seed) == 0:
            raise DomainError("PRG seed must not be empty")
        self.round_index = round_index
        self.label = label
        key = _derive_key(seed, round_index, label)
        cipher = Cipher(algorithms.ChaCha20(key, _NONCE), mode=None)
        self._encryptor = cipher.encryptor()

    def random_bytes(self, n: int) -> bytes:
        return self._encryptor.update(b"\x00" * n)

    def uint64(self, n: int) -> np.ndarray:
        return np.frombuffer(self.random_bytes(8 * n), dtype="<u8").copy()

    def ring_vector(self, n: int, modulus: int) -> np.ndarray:
        """Uniform vector over Z_modulus by rejection sampling masked 64-bit words."""
        bits = modulus.bit_length()
        mask = np.uint64((1 << bits) - 1)
        out: list[np.ndarray] = []
        have = 0
        while have < n:
            want = n - have
            draw = self.uint64(want + want // 2 + 8) & mask
            keep = draw[draw < np.uint64(modulus)][:want]
            out.append(keep)
            have += len(keep)
        if not out:
            return as_int_array(np.zeros(0, dtype=np.int64))
        return as_int_array(np.concatenate(out))

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n)."""
        if n <= 0:
            raise DomainError(f"randbelow bound must be positive, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = int(self.uint64(1)[0])
            if v < limit:
                return v % n

    def permutation(self, n: int) -> np.ndarray:
        """Uniform permutation of range(n) via Fisher-Yates."""
        perm = np.arange(n, dtype=np.int64)
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def numpy_generator(self) -> np.random.Generator:
        """A numpy Generator seeded from this stream, for Gaussian noise and sampling."""
        return np.random.default_rng(int.from_bytes(self.random_bytes(32), "little"))
