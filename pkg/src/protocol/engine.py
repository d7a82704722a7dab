"""
Two-server round driver.

Ingests client share pairs, runs the shuffle with streaming MAC verification,
then the secure aggregation phase, and opens only the final sign vector.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import structlog

from src.aggregation.models import ReferenceDirection
from src.client.params import OutputMode, RainParams
from src.exceptions import ConfigError, ProtocolError
from src.integrity.mac import TaggedShare, slot_tag
from src.integrity.stream import StreamResult, stream_check
from src.protocol.aggregate import (
    secure_hamming,
    secure_relu_weight,
    secure_sign_extract,
    secure_weighted_sum,
    threshold_oracle,
)
from src.protocol.channel import PARTY_NAMES, DuplexChannel
from src.protocol.gates import ComparisonBackend, GateCostModel, IdealGates
from src.protocol.shuffle import shuffle_apply, shuffle_offline
from src.protocol.transcript import MessageKind, RoundTranscript, audit_openings
from src.ring.dealer import DealerBundle, TripleDispenser, TripleRole, shared_from_bundle
from src.ring.field import PrimeRing
from src.ring.sharing import SharedVector, ShareVector, concat_shared

logger = structlog.get_logger()

ClientSubmission = tuple[ShareVector, ShareVector]
# Rewrites the slot stream between shuffle and verification (malicious server hook).
TamperFn = Callable[[RoundTranscript], RoundTranscript]


@dataclass(eq=False)
class MpcRoundResult:
    """
    Outcome of one secure round.

    `output` is the opened sign vector, or None when the round aborted or no slot
    earned a positive weight. The slot_* arrays are simulator bookkeeping in shuffled
    order; `permutation` maps a slot back to its client for ground-truth metrics only.
    """

    round_index: int
    output: np.ndarray | None
    transcript: RoundTranscript
    stream: StreamResult
    tau_int: int | None
    slot_weights: np.ndarray
    slot_counts: np.ndarray
    slot_positions: np.ndarray
    permutation: np.ndarray
    no_trusted_updates: bool = False

    @property
    def aborted(self) -> bool:
        return self.stream.aborted

    def client_weights(self, num_clients: int) -> np.ndarray:
        """Raw weights in client index order; dropped slots stay at zero."""
        weights = np.zeros(num_clients, dtype=np.int64)
        for position, w in zip(self.slot_positions, self.slot_weights, strict=True):
            weights[int(self.permutation[int(position)])] = int(w)
        return weights


class TwoServerAggregator:
    """Drives P0 and P1 through one round with the bundle both derived from the seed."""

    def __init__(
        self,
        params: RainParams,
        cost: GateCostModel | None = None,
        backend: ComparisonBackend | None = None,
    ):
        if params.output_mode is not OutputMode.SIGN:
            raise ConfigError("The two-server protocol only produces sign-mode output")
        self.params = params
        self.cost = cost or GateCostModel()
        self.backend = backend

    def _ingest(self, bundle: DealerBundle, submissions: Sequence[ClientSubmission]) -> RoundTranscript:
        transcript = RoundTranscript(
            round_index=bundle.round_index,
            num_clients=bundle.num_clients,
            dimension=bundle.dimension,
            modulus=bundle.modulus,
        )
        for s0, s1 in submissions:
            transcript.record(MessageKind.CLIENT_SHARE, "client", len(s0), PARTY_NAMES[0])
            transcript.record(MessageKind.CLIENT_SHARE, "client", len(s1), PARTY_NAMES[1])
            transcript.record(MessageKind.UPLOAD_TAG, "client", 1)
        transcript.add_rounds(1)
        return transcript

    def _shuffle(
        self,
        bundle: DealerBundle,
        submissions: Sequence[ClientSubmission],
        transcript: RoundTranscript,
    ) -> list[TaggedShare]:
        num_clients, dimension = bundle.num_clients, bundle.dimension
        state = shuffle_offline(bundle, num_clients, dimension)
        ingest_tags = [slot_tag(SharedVector(s0, s1), bundle.mac_key) for s0, s1 in submissions]

        out0 = shuffle_apply(state, [s0 for s0, _ in submissions], 0)
        out1 = shuffle_apply(state, [s1 for _, s1 in submissions], 1)
        for party in (0, 1):
            transcript.record(MessageKind.SHUFFLED_SHARE, PARTY_NAMES[party], num_clients * dimension)

        return [
            TaggedShare(
                round_index=bundle.round_index,
                position=i,
                shares=SharedVector(out0[i], out1[i]),
                tag=ingest_tags[int(src)],
            )
            for i, src in enumerate(state.permutation)
        ]

    def run_round(
        self,
        bundle: DealerBundle,
        submissions: Sequence[ClientSubmission],
        reference: ReferenceDirection,
        tamper: Sequence[TamperFn] = (),
    ) -> MpcRoundResult:
        """
        Run the shuffle and aggregation phases for one round.

        Args:
            bundle: Dealer output for this round
            submissions: (share for P0, share for P1) per client, in client index order
            reference: Trusted sign direction, known to both servers
            tamper: Deviations applied to the slot stream after the shuffle

        Returns:
            MpcRoundResult with the opened sign vector (or None) and the full transcript
        """
        if len(submissions) != bundle.num_clients:
            raise ProtocolError(f"Bundle expects {bundle.num_clients} clients, got {len(submissions)}")
        if len(reference) != bundle.dimension:
            raise ProtocolError(f"Reference has d={len(reference)}, bundle has d={bundle.dimension}")

        transcript = self._ingest(bundle, submissions)
        transcript.slots = self._shuffle(bundle, submissions, transcript)
        for deviate in tamper:
            transcript = deviate(transcript)

        def _tag_exchange(slot: TaggedShare) -> None:
            transcript.record(MessageKind.MAC_TAG, PARTY_NAMES[0], 1)
            transcript.record(MessageKind.MAC_TAG, PARTY_NAMES[1], 1)

        stream = stream_check(
            transcript.slots,
            bundle.mac_key,
            self.params.integrity,
            expected_count=bundle.num_clients,
            on_checked=_tag_exchange,
        )
        transcript.add_rounds(1)

        result = MpcRoundResult(
            round_index=bundle.round_index,
            output=None,
            transcript=transcript,
            stream=stream,
            tau_int=None,
            slot_weights=np.zeros(0, dtype=np.int64),
            slot_counts=np.zeros(0, dtype=np.int64),
            slot_positions=np.array([s.position for s in stream.verified], dtype=np.int64),
            permutation=bundle.permutation,
        )
        if stream.aborted:
            logger.warning("Round aborted", **stream.abort.to_dict())
            return result
        if not stream.verified:
            result.no_trusted_updates = True
            return result

        self._aggregate_phase(bundle, stream.verified, reference, transcript, result)
        return result

    def _aggregate_phase(
        self,
        bundle: DealerBundle,
        verified: Sequence[TaggedShare],
        reference: ReferenceDirection,
        transcript: RoundTranscript,
        result: MpcRoundResult,
    ) -> None:
        ring = PrimeRing(bundle.modulus)
        d = bundle.dimension
        channel = DuplexChannel(transcript)
        opener = channel.opener(MessageKind.BEAVER_OPEN)
        dispenser = TripleDispenser(bundle.triples)
        gates = IdealGates(ring, bundle.prg("gates"), transcript, self.cost, self.backend)
        ref_bits = shared_from_bundle(bundle, reference.bits, "reference")

        hd = concat_shared(
            [
                secure_hamming(slot.shares, ref_bits, dispenser.take(TripleRole.XOR, d), opener)
                for slot in verified
            ]
        )
        threshold = threshold_oracle(hd, self.params.lambda_mad, gates)
        result.tau_int = gates.last_tau
        result.slot_counts = ring.centered_lift(hd.reconstruct()).astype(np.int64)

        if not threshold.has_support:
            result.no_trusted_updates = True
            result.slot_weights = np.zeros(len(verified), dtype=np.int64)
            logger.warning("No trusted updates", round=bundle.round_index, tau=result.tau_int)
            self._audit(transcript, dispenser)
            return

        weights = secure_relu_weight(
            threshold.tau, hd, dispenser.take(TripleRole.RELU, len(verified)), gates, opener
        )
        z = secure_weighted_sum(
            weights,
            [slot.shares for slot in verified],
            [dispenser.take(TripleRole.WSUM, d) for _ in verified],
            opener,
        )
        signs = secure_sign_extract(z, gates)
        opened = channel.open(signs, MessageKind.OUTPUT_OPEN, "s_next")

        result.output = ring.centered_lift(opened).astype(np.int64)
        result.slot_weights = ring.centered_lift(weights.reconstruct()).astype(np.int64)
        self._audit(transcript, dispenser)

    @staticmethod
    def _audit(transcript: RoundTranscript, dispenser: TripleDispenser) -> None:
        violations = audit_openings(transcript, dispenser.consumed_lengths())
        if violations:
            raise ProtocolError("; ".join(violations))
