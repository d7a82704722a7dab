"""
Streaming integrity layer.

Per-round Carter-Wegman keys, tags on every shuffled slot, and on-receipt
verification with halt or drop semantics.
"""

from src.integrity.mac import (
    MacKey,
    TaggedShare,
    Verdict,
    derive_round_key,
    mac_tag,
    mac_verify,
    slot_tag,
)
from src.integrity.stream import (
    AbortReason,
    AbortReport,
    IntegrityPolicy,
    StreamResult,
    stream_check,
)

__all__ = [
    "MacKey",
    "TaggedShare",
    "Verdict",
    "derive_round_key",
    "mac_tag",
    "mac_verify",
    "slot_tag",
    "AbortReason",
    "AbortReport",
    "IntegrityPolicy",
    "StreamResult",
    "stream_check",
]
