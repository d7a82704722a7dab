"""Beaver-triple multiplication over additive shares."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from src.exceptions import ProtocolError
from src.ring.sharing import SharedVector

# Opens a sharing to both parties and returns the public value. The label names the
# opened quantity ("e" or "f") for the transcript.
Opener = Callable[[SharedVector, str], np.ndarray]


def local_open(shared: SharedVector, label: str) -> np.ndarray:
    """Opener with no transcript, for standalone use."""
    return shared.reconstruct()


@dataclass(eq=False)
class BeaverTriple:
    """
    Shares of (x, y, z) with z = x * y elementwise.

    A triple of length n pays for n scalar multiplications and may be used once.
    """

    x: SharedVector
    y: SharedVector
    z: SharedVector
    consumed: bool = False

    def __post_init__(self) -> None:
        if not len(self.x) == len(self.y) == len(self.z):
            raise ProtocolError("Beaver triple components differ in length")

    def __len__(self) -> int:
        return len(self.x)

    def consume(self) -> None:
        if self.consumed:
            raise ProtocolError("Beaver triple already consumed")
        self.consumed = True


def mul_shares(
    a: SharedVector,
    b: SharedVector,
    triple: BeaverTriple,
    opener: Opener | None = None,
) -> SharedVector:
    """
    Multiply two sharings elementwise with one Beaver triple.

    Each party opens e = a - x and f = b - y, then party t computes
    -t*e*f + f*<a>_t + e*<b>_t + <z>_t.

    Args:
        a: Left operand sharing
        b: Right operand sharing
        triple: Unused triple of the same length
        opener: Channel used to open e and f, defaults to local reconstruction

    Returns:
        Sharing of a * b mod p
    """
    if len(a) != len(b) or len(a) != len(triple):
        raise ProtocolError(
            f"Operand/triple length mismatch: {len(a)}, {len(b)}, {len(triple)}"
        )
    triple.consume()
    open_fn = opener or local_open
    p = a.modulus

    e = open_fn(a.sub(triple.x), "e")
    f = open_fn(b.sub(triple.y), "f")

    parts = []
    for t in (0, 1):
        a_t = a.share(t).elems
        b_t = b.share(t).elems
        z_t = triple.z.share(t).elems
        value = (f * a_t + e * b_t + z_t - t * e * f) % p
        parts.append(triple.z.share(t).with_elems(value))
    return SharedVector(parts[0], parts[1])
