"""
Wire encoding for ring vectors.

Layout of one vector: u32 little-endian element count, then each element as an
8-byte little-endian unsigned integer. Headers use the same fixed-width integers.
"""

import struct
from typing import Any

import numpy as np

from src.exceptions import IntegrityError
from src.ring.field import ELEMENT_BYTES, as_int_array

_COUNT = struct.Struct("<I")
_U64 = struct.Struct("<Q")


def pack_u32(value: int) -> bytes:
    return _COUNT.pack(value)


def pack_u64(value: int) -> bytes:
    return _U64.pack(value)


def pack_elements(values: Any) -> bytes:
    arr = as_int_array(values)
    body = np.asarray(list(arr), dtype="<u8").tobytes() if len(arr) else b""
    return _COUNT.pack(len(arr)) + body


def unpack_u32(buf: bytes, offset: int) -> tuple[int, int]:
    if offset + _COUNT.size > len(buf):
        raise IntegrityError(f"Truncated buffer at offset {offset}")
    return _COUNT.unpack_from(buf, offset)[0], offset + _COUNT.size


def unpack_u64(buf: bytes, offset: int) -> tuple[int, int]:
    if offset + _U64.size > len(buf):
        raise IntegrityError(f"Truncated buffer at offset {offset}")
    return _U64.unpack_from(buf, offset)[0], offset + _U64.size


def unpack_elements(buf: bytes, offset: int = 0) -> tuple[np.ndarray, int]:
    """Read one length-prefixed vector starting at offset; returns (vector, next offset)."""
    count, offset = unpack_u32(buf, offset)
    end = offset + count * ELEMENT_BYTES
    if end > len(buf):
        raise IntegrityError(f"Truncated vector: need {end} bytes, have {len(buf)}")
    values = np.frombuffer(buf[offset:end], dtype="<u8")
    return as_int_array(values.astype(np.uint64)), end
