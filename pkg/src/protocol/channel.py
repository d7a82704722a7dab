"""In-process duplex link between the two servers."""

from collections import deque

import numpy as np

from src.exceptions import ProtocolError
from src.protocol.transcript import MessageKind, RoundTranscript
from src.ring.beaver import Opener
from src.ring.sharing import SharedVector

PARTY_NAMES = ("P0", "P1")


class DuplexChannel:
    """
    Ordered, reliable message queues between P0 and P1.

    Every send is recorded in the round transcript. The round driver is the only
    sequencer, so an exchange is: both parties send, then both parties receive.
    """

    def __init__(self, transcript: RoundTranscript):
        self.transcript = transcript
        self._inbox: dict[int, deque[tuple[MessageKind, str, np.ndarray]]] = {0: deque(), 1: deque()}

    def send(self, sender: int, kind: MessageKind, payload: np.ndarray, label: str = "") -> None:
        self._inbox[1 - sender].append((kind, label, payload))
        self.transcript.record(kind, PARTY_NAMES[sender], len(payload), label)

    def receive(self, party: int, kind: MessageKind) -> np.ndarray:
        if not self._inbox[party]:
            raise ProtocolError(f"{PARTY_NAMES[party]} expected {kind.value}, inbox empty")
        got_kind, label, payload = self._inbox[party].popleft()
        if got_kind is not kind:
            raise ProtocolError(f"{PARTY_NAMES[party]} expected {kind.value}, got {got_kind.value}")
        return payload

    def exchange(
        self,
        kind: MessageKind,
        payload0: np.ndarray,
        payload1: np.ndarray,
        label: str = "",
    ) -> tuple[np.ndarray, np.ndarray]:
        """One interaction round: returns (what P0 received, what P1 received)."""
        self.send(0, kind, payload0, label)
        self.send(1, kind, payload1, label)
        self.transcript.add_rounds(1)
        return self.receive(0, kind), self.receive(1, kind)

    def open(self, shared: SharedVector, kind: MessageKind, label: str = "") -> np.ndarray:
        """Both parties publish their share; each reconstructs locally."""
        from_p1, from_p0 = self.exchange(kind, shared.s0.elems, shared.s1.elems, label)
        p = shared.modulus
        view0 = (shared.s0.elems + from_p1) % p
        view1 = (from_p0 + shared.s1.elems) % p
        if not np.array_equal(view0, view1):
            raise ProtocolError(f"Parties disagree on opened {label or kind.value}")
        return view0

    def opener(self, kind: MessageKind = MessageKind.BEAVER_OPEN) -> Opener:
        def _open(shared: SharedVector, label: str) -> np.ndarray:
            return self.open(shared, kind, label)

        return _open
