"""Malicious-server deviations against the shuffled slot stream."""

import structlog

from src.adversary.models import ServerTamperSpec, TamperTarget
from src.exceptions import DomainError
from src.integrity.mac import TaggedShare
from src.protocol.transcript import RoundTranscript, TamperRecord
from src.ring.sharing import SharedVector

logger = structlog.get_logger()


def _perturb(tagged: TaggedShare, party: int, coordinate: int, delta: int) -> TaggedShare:
    share = tagged.shares.share(party)
    if coordinate >= len(share):
        raise DomainError(f"Coordinate {coordinate} outside slot of length {len(share)}")
    elems = share.elems.copy()
    elems[coordinate] = elems[coordinate] + delta
    perturbed = share.with_elems(elems)
    shares = SharedVector(perturbed, tagged.shares.s1) if party == 0 else SharedVector(tagged.shares.s0, perturbed)
    return TaggedShare(tagged.round_index, tagged.position, shares, tagged.tag)


def server_tamper(transcript: RoundTranscript, spec: ServerTamperSpec) -> RoundTranscript:
    """
    Apply one deviation to one party's outgoing stream.

    Returns a new transcript; the input is left untouched. The deviation is recorded
    in `tampering` as ground truth for detection scoring.
    """
    slots = list(transcript.slots)
    if not 0 <= spec.position < len(slots):
        raise DomainError(f"Tamper position {spec.position} outside batch of {len(slots)}")
    target = slots[spec.position]

    if spec.target is TamperTarget.SHUFFLED_SHARE:
        slots[spec.position] = _perturb(target, spec.party, spec.coordinate, spec.delta)
    elif spec.target is TamperTarget.TAG:
        tag = (target.tag + spec.delta) % transcript.modulus
        slots[spec.position] = TaggedShare(target.round_index, target.position, target.shares, tag)
    elif spec.target is TamperTarget.DROP:
        del slots[spec.position]
    else:
        slots.append(target)

    record = TamperRecord(
        target=spec.target.value,
        position=spec.position,
        party=spec.party,
        delta=spec.delta,
        coordinate=spec.coordinate,
    )
    logger.debug("Tamper injected", round=transcript.round_index, target=spec.target.value)
    return transcript.with_slots(slots, record)
