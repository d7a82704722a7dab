"""Streaming verification of shuffled slots with halt/drop policies."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import structlog

from src.exceptions import IntegrityError
from src.integrity.mac import MacKey, TaggedShare, Verdict, mac_verify

logger = structlog.get_logger()


class IntegrityPolicy(str, Enum):
    """What to do with a slot whose tag fails."""

    HALT = "halt"
    DROP = "drop"


class AbortReason(str, Enum):
    MAC_REJECT = "mac_reject"
    CARDINALITY = "cardinality"


@dataclass(frozen=True)
class AbortReport:
    """Why a round stopped. Names a batch position, never a client."""

    round_index: int
    batch_index: int
    policy: IntegrityPolicy
    action: str
    reason: AbortReason

    def to_dict(self) -> dict[str, Any]:
        return {
            "round": self.round_index,
            "batch_index": self.batch_index,
            "policy": self.policy.value,
            "action": self.action,
            "reason": self.reason.value,
        }


@dataclass
class StreamResult:
    """Slots that passed verification plus bookkeeping about the ones that did not."""

    verified: list[TaggedShare] = field(default_factory=list)
    rejected: list[int] = field(default_factory=list)
    duplicates: list[int] = field(default_factory=list)
    missing: list[int] = field(default_factory=list)
    abort: AbortReport | None = None

    @property
    def aborted(self) -> bool:
        return self.abort is not None

    @property
    def dropped(self) -> int:
        return len(self.rejected) + len(self.duplicates)


def stream_check(
    batch: Sequence[TaggedShare],
    key: MacKey,
    policy: IntegrityPolicy,
    expected_count: int | None = None,
    on_checked: Callable[[TaggedShare], None] | None = None,
) -> StreamResult:
    """
    Verify each slot as it arrives, then check exactly-once delivery.

    The halt decision is a fold over batch order, so the first failure wins.

    Args:
        batch: Slots in arrival order
        key: MAC key for this round
        policy: HALT aborts on the first failure, DROP discards failing slots
        expected_count: Number of slots the round must deliver (positions 0..n-1)
        on_checked: Called for every slot whose tag was checked (transcript hook)

    Returns:
        StreamResult with verified slots or an abort report
    """
    result = StreamResult()
    seen: set[int] = set()

    for batch_index, tagged in enumerate(batch):
        if tagged.round_index != key.round_index:
            raise IntegrityError(
                f"Slot from round {tagged.round_index} checked with round {key.round_index} key"
            )
        if on_checked is not None:
            on_checked(tagged)

        if mac_verify(tagged, key) is Verdict.REJECT:
            logger.warning(
                "MAC reject",
                round=key.round_index,
                batch_index=batch_index,
                policy=policy.value,
            )
            if policy is IntegrityPolicy.HALT:
                result.abort = AbortReport(
                    round_index=key.round_index,
                    batch_index=batch_index,
                    policy=policy,
                    action="halt",
                    reason=AbortReason.MAC_REJECT,
                )
                result.verified = []
                return result
            result.rejected.append(batch_index)
            continue

        if tagged.position in seen:
            result.duplicates.append(batch_index)
            if policy is IntegrityPolicy.HALT:
                result.abort = AbortReport(
                    round_index=key.round_index,
                    batch_index=batch_index,
                    policy=policy,
                    action="halt",
                    reason=AbortReason.CARDINALITY,
                )
                result.verified = []
                return result
            continue

        seen.add(tagged.position)
        result.verified.append(tagged)

    if expected_count is not None:
        delivered = {t.position for t in batch}
        result.missing = [i for i in range(expected_count) if i not in delivered]
        if result.missing and policy is IntegrityPolicy.HALT:
            logger.warning("Slot missing from batch", round=key.round_index, missing=len(result.missing))
            result.abort = AbortReport(
                round_index=key.round_index,
                batch_index=len(batch),
                policy=policy,
                action="halt",
                reason=AbortReason.CARDINALITY,
            )
            result.verified = []

    return result
