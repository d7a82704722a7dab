"""
Ideal-functionality gates: comparison and the robust threshold.

The default backend reconstructs inside the gate boundary, computes the result and
hands each party a fresh sharing. Nothing but the declared output leaves the gate.
"""

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from src.aggregation.rain import count_threshold
from src.exceptions import DomainError, ProtocolError
from src.protocol.transcript import MessageKind, RoundTranscript
from src.ring.field import PrimeRing
from src.ring.prg import Prg
from src.ring.sharing import SharedVector, share_pair


@dataclass(frozen=True)
class GateCostModel:
    """Opened-element and round counts per gate, for transcript accounting."""

    cmp_elements: int = 2
    cmp_rounds: int = 1
    threshold_rounds: int = 1

    def cmp_cost(self, n: int) -> int:
        return self.cmp_elements * n


class ComparisonBackend(Protocol):
    def compare(self, x: np.ndarray, y: np.ndarray) -> np.ndarray: ...


class ReconstructingBackend:
    """x >= y on centered integers."""

    def compare(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.array([1 if int(a) - int(b) >= 0 else 0 for a, b in zip(x, y, strict=True)], dtype=np.int64)


@dataclass(frozen=True)
class ThresholdOutput:
    """What the threshold gate declares: tau_int shares and whether any weight is positive."""

    tau: SharedVector
    has_support: bool


class IdealGates:
    """Sealed boundary for Cmp and the threshold oracle in one round."""

    def __init__(
        self,
        ring: PrimeRing,
        prg: Prg,
        transcript: RoundTranscript | None = None,
        cost: GateCostModel | None = None,
        backend: ComparisonBackend | None = None,
    ):
        self.ring = ring
        self._prg = prg
        self._transcript = transcript
        self.cost = cost or GateCostModel()
        self._backend = backend or ReconstructingBackend()
        # Gate-internal value, exposed for harness bookkeeping only.
        self.last_tau: int | None = None

    def _signed(self, shared: SharedVector) -> np.ndarray:
        values = self.ring.centered_lift(shared.reconstruct())
        if not self.ring.fits_headroom(values):
            raise ProtocolError(f"Gate input exceeds headroom (p-1)/4 = {self.ring.headroom}")
        return values

    def _reshare(self, values: np.ndarray) -> SharedVector:
        return share_pair(self.ring.encode(values), self._prg, self.ring.modulus)

    def _record(self, kind: MessageKind, elements: int, rounds: int, label: str) -> None:
        if self._transcript is None:
            return
        self._transcript.record(kind, "P0", elements, label)
        self._transcript.record(kind, "P1", elements, label)
        self._transcript.add_rounds(rounds)

    def cmp(self, x: SharedVector, y: SharedVector, label: str = "cmp") -> SharedVector:
        """Shares of 1 where centered(x) >= centered(y), else 0."""
        if len(x) != len(y):
            raise ProtocolError(f"Cmp length mismatch: {len(x)} != {len(y)}")
        bits = self._backend.compare(self._signed(x), self._signed(y))
        self._record(MessageKind.GATE_CMP, self.cost.cmp_cost(len(x)), self.cost.cmp_rounds, label)
        return self._reshare(bits)

    def threshold(self, hd: SharedVector, lambda_mad: float) -> ThresholdOutput:
        """
        Reveal the unordered Hamming multiset to the gate and return tau_int shares.

        tau_int = round(median(hd) + 1.4826 * lambda_mad * MAD(hd)), half up.
        """
        if len(hd) == 0:
            raise DomainError("Threshold gate needs at least one distance")
        counts = sorted(int(v) for v in self._signed(hd))
        tau_int = count_threshold(counts, lambda_mad)
        if len(counts) * abs(tau_int) > self.ring.headroom:
            raise ProtocolError("K * tau_int exceeds headroom")
        self.last_tau = tau_int
        self._record(MessageKind.GATE_THRESHOLD, len(counts) + 1, self.cost.threshold_rounds, "tau")
        return ThresholdOutput(
            tau=self._reshare(np.array([tau_int], dtype=object)),
            has_support=any(c < tau_int for c in counts),
        )
