"""
Prime-ring arithmetic over Z_p.

Ring vectors are numpy arrays with dtype=object holding Python ints, so reductions
modulo the default Mersenne prime 2^61 - 1 stay exact without overflow.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np

from src.exceptions import DomainError

MERSENNE_61 = (1 << 61) - 1
DEFAULT_MODULUS = MERSENNE_61
SMALL_TEST_MODULUS = 97

# Wire size of one ring element, independent of p as long as p < 2^64.
ELEMENT_BYTES = 8


def as_int_array(values: Any) -> np.ndarray:
    """Convert integer-valued input to an object array of Python ints."""
    arr = np.asarray(values)
    if arr.dtype == bool:
        return arr.astype(np.int64).astype(object)
    if arr.dtype == object:
        flat = arr.ravel()
        for v in flat:
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise DomainError(f"Ring elements must be integers, got {type(v).__name__}")
        if arr.size == 0:
            return arr
        return np.frompyfunc(int, 1, 1)(arr).astype(object)
    if not np.issubdtype(arr.dtype, np.integer):
        raise DomainError(f"Ring elements must be integers, got dtype {arr.dtype}")
    return arr.astype(object)


@dataclass(frozen=True)
class PrimeRing:
    """
    The ring Z_p for an odd prime p.

    Signed values use the centered lift: an element v represents v if v <= (p-1)/2
    and v - p otherwise.
    """

    modulus: int = DEFAULT_MODULUS

    def __post_init__(self) -> None:
        if self.modulus < 3 or self.modulus % 2 == 0:
            raise DomainError(f"Modulus must be an odd prime, got {self.modulus}")
        if self.modulus >= 1 << (8 * ELEMENT_BYTES):
            raise DomainError("Modulus must fit in an 8-byte element")

    @property
    def half(self) -> int:
        return (self.modulus - 1) // 2

    @property
    def headroom(self) -> int:
        """Largest magnitude a signed value may carry into a comparison gate."""
        return (self.modulus - 1) // 4

    def vector(self, values: Any) -> np.ndarray:
        """Validate that every entry is already in [0, p) and return a ring vector."""
        arr = as_int_array(values)
        if arr.size and (bool((arr < 0).any()) or bool((arr >= self.modulus).any())):
            raise DomainError(f"Ring entries must lie in [0, {self.modulus})")
        return arr

    def encode(self, values: Any) -> np.ndarray:
        """Map signed integers with |x| <= (p-1)/2 into Z_p."""
        arr = as_int_array(values)
        if arr.size and bool((abs(arr) > self.half).any()):
            raise DomainError(f"Signed values must satisfy |x| <= {self.half}")
        return arr % self.modulus

    def centered_lift(self, values: Any) -> np.ndarray:
        """Inverse of encode: elements above (p-1)/2 map to negative integers."""
        arr = as_int_array(values) % self.modulus
        return np.where(arr > self.half, arr - self.modulus, arr).astype(object)

    def zeros(self, n: int) -> np.ndarray:
        return np.zeros(n, dtype=np.int64).astype(object)

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a + b) % self.modulus

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a - b) % self.modulus

    def neg(self, a: np.ndarray) -> np.ndarray:
        return (-a) % self.modulus

    def mul(self, a: np.ndarray | int, b: np.ndarray | int) -> np.ndarray:
        return np.asarray(a * b, dtype=object) % self.modulus

    def dot(self, a: np.ndarray, b: np.ndarray) -> int:
        if len(a) != len(b):
            raise DomainError(f"Length mismatch: {len(a)} != {len(b)}")
        return int(sum(int(x) * int(y) for x, y in zip(a, b, strict=True)) % self.modulus)

    def fits_headroom(self, signed: np.ndarray) -> bool:
        return not bool((abs(signed) > self.headroom).any()) if len(signed) else True
