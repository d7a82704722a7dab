"""
Round transcripts.

An ordered record of every message in a round with element and byte counts, plus the
tagged shuffled slots as streamed. Comm accounting, tamper injection, the opening
audit and the binary dump all work from this record.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

from src.exceptions import IntegrityError
from src.integrity.mac import TaggedShare
from src.ring.codec import (
    pack_elements,
    pack_u32,
    pack_u64,
    unpack_elements,
    unpack_u32,
    unpack_u64,
)
from src.ring.field import ELEMENT_BYTES
from src.ring.sharing import SharedVector, ShareVector

DUMP_MAGIC = b"RAINTRSC"
DUMP_VERSION = 1


class MessageKind(str, Enum):
    CLIENT_SHARE = "client_share"
    UPLOAD_TAG = "upload_tag"
    SHUFFLED_SHARE = "shuffled_share"
    MAC_TAG = "mac_tag"
    BEAVER_OPEN = "beaver_open"
    GATE_CMP = "gate_cmp"
    GATE_THRESHOLD = "gate_threshold"
    OUTPUT_OPEN = "output_open"


class Link(str, Enum):
    CLIENT_TO_SERVER = "client_to_server"
    SERVER_TO_SERVER = "server_to_server"
    LOCAL = "local"


LINK_OF: dict[MessageKind, Link] = {
    MessageKind.CLIENT_SHARE: Link.CLIENT_TO_SERVER,
    MessageKind.UPLOAD_TAG: Link.CLIENT_TO_SERVER,
    MessageKind.SHUFFLED_SHARE: Link.LOCAL,
    MessageKind.MAC_TAG: Link.SERVER_TO_SERVER,
    MessageKind.BEAVER_OPEN: Link.SERVER_TO_SERVER,
    MessageKind.GATE_CMP: Link.SERVER_TO_SERVER,
    MessageKind.GATE_THRESHOLD: Link.SERVER_TO_SERVER,
    MessageKind.OUTPUT_OPEN: Link.SERVER_TO_SERVER,
}

MAC_KINDS = frozenset({MessageKind.UPLOAD_TAG, MessageKind.MAC_TAG})

# Server-to-server messages allowed to carry opened values.
DECLARED_OPENINGS = frozenset(
    {
        MessageKind.BEAVER_OPEN,
        MessageKind.GATE_CMP,
        MessageKind.GATE_THRESHOLD,
        MessageKind.MAC_TAG,
        MessageKind.OUTPUT_OPEN,
    }
)


@dataclass(frozen=True)
class TranscriptEntry:
    round_index: int
    kind: MessageKind
    sender: str
    elements: int
    label: str = ""

    @property
    def nbytes(self) -> int:
        return self.elements * ELEMENT_BYTES

    @property
    def link(self) -> Link:
        return LINK_OF[self.kind]


@dataclass(frozen=True)
class TamperRecord:
    """Ground truth for one injected server deviation."""

    target: str
    position: int
    party: int
    delta: int
    coordinate: int = 0


@dataclass(eq=False)
class RoundTranscript:
    round_index: int
    num_clients: int
    dimension: int
    modulus: int
    entries: list[TranscriptEntry] = field(default_factory=list)
    slots: list[TaggedShare] = field(default_factory=list)
    tampering: list[TamperRecord] = field(default_factory=list)
    interaction_rounds: int = 0

    def record(self, kind: MessageKind, sender: str, elements: int, label: str = "") -> None:
        self.entries.append(TranscriptEntry(self.round_index, kind, sender, elements, label))

    def add_rounds(self, n: int) -> None:
        self.interaction_rounds += n

    def total_bytes(self, kind: MessageKind | None = None, link: Link | None = None) -> int:
        return sum(
            e.nbytes
            for e in self.entries
            if (kind is None or e.kind is kind) and (link is None or e.link is link)
        )

    def total_elements(self, kind: MessageKind) -> int:
        return sum(e.elements for e in self.entries if e.kind is kind)

    def with_slots(self, slots: list[TaggedShare], tamper: TamperRecord | None = None) -> "RoundTranscript":
        """Copy of this transcript carrying a different slot stream."""
        tampering = [*self.tampering, tamper] if tamper is not None else list(self.tampering)
        return replace(self, entries=list(self.entries), slots=slots, tampering=tampering)

    def to_bytes(self) -> bytes:
        """
        Binary dump of the slot stream.

        Header: magic, u32 version, u64 round, u32 K, u32 d, u64 p, u32 slot count.
        Each slot: u32 position, u64 tag, then the party 0 and party 1 share vectors.
        """
        parts = [
            DUMP_MAGIC,
            pack_u32(DUMP_VERSION),
            pack_u64(self.round_index),
            pack_u32(self.num_clients),
            pack_u32(self.dimension),
            pack_u64(self.modulus),
            pack_u32(len(self.slots)),
        ]
        for slot in self.slots:
            parts.append(pack_u32(slot.position))
            parts.append(pack_u64(slot.tag % self.modulus))
            parts.append(pack_elements(slot.shares.s0.elems))
            parts.append(pack_elements(slot.shares.s1.elems))
        return b"".join(parts)


@dataclass(eq=False)
class TranscriptDump:
    """A decoded slot stream. `truncated` is set when the file ended mid-slot."""

    round_index: int
    num_clients: int
    dimension: int
    modulus: int
    declared_count: int
    slots: list[TaggedShare]
    truncated: bool = False


def decode_dump(buf: bytes) -> TranscriptDump:
    """Parse a slot stream dump; a damaged header raises IntegrityError."""
    if not buf.startswith(DUMP_MAGIC):
        raise IntegrityError("Not a transcript dump (bad magic)")
    offset = len(DUMP_MAGIC)
    version, offset = unpack_u32(buf, offset)
    if version != DUMP_VERSION:
        raise IntegrityError(f"Unsupported dump version {version}")
    round_index, offset = unpack_u64(buf, offset)
    num_clients, offset = unpack_u32(buf, offset)
    dimension, offset = unpack_u32(buf, offset)
    modulus, offset = unpack_u64(buf, offset)
    declared, offset = unpack_u32(buf, offset)

    slots: list[TaggedShare] = []
    truncated = False
    while offset < len(buf):
        try:
            position, cursor = unpack_u32(buf, offset)
            tag, cursor = unpack_u64(buf, cursor)
            s0, cursor = unpack_elements(buf, cursor)
            s1, cursor = unpack_elements(buf, cursor)
        except IntegrityError:
            truncated = True
            break
        if len(s0) != dimension or len(s1) != dimension:
            raise IntegrityError(f"Slot at byte {offset} has the wrong dimension")
        shares = SharedVector(ShareVector(0, s0, modulus), ShareVector(1, s1, modulus))
        slots.append(TaggedShare(round_index=round_index, position=position, shares=shares, tag=tag))
        offset = cursor

    return TranscriptDump(
        round_index=round_index,
        num_clients=num_clients,
        dimension=dimension,
        modulus=modulus,
        declared_count=declared,
        slots=slots,
        truncated=truncated,
    )


def audit_openings(transcript: RoundTranscript, consumed_triple_lengths: Sequence[int]) -> list[str]:
    """
    Check that the only opened values are Beaver e/f pairs and declared gate outputs.

    Returns:
        Human-readable violations, empty when the transcript is clean
    """
    violations = []
    for entry in transcript.entries:
        if entry.link is Link.SERVER_TO_SERVER and entry.kind not in DECLARED_OPENINGS:
            violations.append(f"undeclared opening {entry.kind.value} from {entry.sender}")

    # e and f per triple, one message from each party
    expected = 4 * sum(consumed_triple_lengths)
    opened = transcript.total_elements(MessageKind.BEAVER_OPEN)
    if opened != expected:
        violations.append(f"Beaver openings carry {opened} elements, expected {expected}")
    return violations
