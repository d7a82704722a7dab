"""Unit tests for MAC tags, streaming verification and offline re-verification."""

import numpy as np
import pytest

from src.exceptions import DomainError, IntegrityError
from src.integrity import (
    AbortReason,
    IntegrityPolicy,
    TaggedShare,
    Verdict,
    derive_round_key,
    mac_tag,
    mac_verify,
    slot_tag,
    stream_check,
)
from src.integrity.offline import offline_verify
from src.protocol.transcript import RoundTranscript, decode_dump
from src.ring.prg import Prg
from src.ring.sharing import SharedVector, share_pair

K = 4
D = 5


def _batch(seed: bytes, round_index: int = 0) -> tuple[list[TaggedShare], object]:
    key = derive_round_key(seed, round_index, D)
    prg = Prg(seed, round_index, "test-batch")
    slots = []
    for position in range(K):
        shares = share_pair(prg.ring_vector(D, key.modulus), prg, key.modulus)
        slots.append(TaggedShare(round_index, position, shares, slot_tag(shares, key)))
    return slots, key


def _with_tag(slot: TaggedShare, tag: int) -> TaggedShare:
    return TaggedShare(slot.round_index, slot.position, slot.shares, tag)


def _with_share_delta(slot: TaggedShare, delta: int) -> TaggedShare:
    s0 = slot.shares.s0
    elems = s0.elems.copy()
    elems[0] = elems[0] + delta
    shares = SharedVector(s0.with_elems(elems), slot.shares.s1)
    return TaggedShare(slot.round_index, slot.position, shares, slot.tag)


class TestMacTag:
    """Tests for the linear tag."""

    def test_tag_is_linear_over_shares(self, seed, prg):
        """Test tag(s0) + tag(s1) equals the tag of the payload."""
        key = derive_round_key(seed, 0, D)
        payload = prg.ring_vector(D, key.modulus)
        shares = share_pair(payload, prg, key.modulus)
        assert slot_tag(shares, key) == mac_tag(payload, key, key.modulus)

    def test_key_shares_reconstruct(self, seed):
        """Test the key shares sum to the key."""
        key = derive_round_key(seed, 2, D)
        assert np.array_equal(key.full(), key.key)
        assert key.round_index == 2

    def test_keys_differ_per_round(self, seed):
        """Test each round gets a fresh key."""
        assert not np.array_equal(derive_round_key(seed, 0, D).key, derive_round_key(seed, 1, D).key)

    def test_zero_dimension_rejected(self, seed):
        """Test a key needs at least one coordinate."""
        with pytest.raises(DomainError):
            derive_round_key(seed, 0, 0)

    def test_honest_slot_accepted(self, seed):
        """Test untouched slots verify."""
        slots, key = _batch(seed)
        assert all(mac_verify(s, key) is Verdict.ACCEPT for s in slots)

    def test_perturbed_share_rejected(self, seed):
        """Test a one-element additive change is caught."""
        slots, key = _batch(seed)
        assert mac_verify(_with_share_delta(slots[1], 1), key) is Verdict.REJECT

    def test_perturbed_tag_rejected(self, seed):
        """Test a modified tag is caught."""
        slots, key = _batch(seed)
        assert mac_verify(_with_tag(slots[0], slots[0].tag + 1), key) is Verdict.REJECT

    def test_wrong_dimension_rejected(self, seed, prg):
        """Test a slot of the wrong length never verifies."""
        _, key = _batch(seed)
        shares = share_pair(prg.ring_vector(D + 1, key.modulus), prg, key.modulus)
        assert mac_verify(TaggedShare(0, 0, shares, 0), key) is Verdict.REJECT


    @pytest.mark.slow
    def test_forgery_acceptance_rate(self, seed, prg, np_rng):
        """Test a blind share change with a guessed tag passes 1/p of the time at p = 97."""
        trials, p = 100_000, 97
        shares = share_pair(prg.ring_vector(D, p), prg, p)
        accepted = 0
        for round_index in range(trials):
            key = derive_round_key(seed, round_index, D, p)
            slot = TaggedShare(round_index, 0, shares, slot_tag(shares, key))
            forged = _with_share_delta(slot, int(np_rng.integers(1, p)))
            forged = _with_tag(forged, forged.tag + int(np_rng.integers(0, p)))
            accepted += mac_verify(forged, key) is Verdict.ACCEPT
        stderr = np.sqrt((1 / p) * (1 - 1 / p) / trials)
        assert abs(accepted / trials - 1 / p) <= 3 * stderr

class TestStreamCheck:
    """Tests for on-receipt verification."""

    def test_clean_batch(self, seed):
        """Test every honest slot passes."""
        slots, key = _batch(seed)
        checked = []
        result = stream_check(slots, key, IntegrityPolicy.HALT, expected_count=K, on_checked=checked.append)
        assert not result.aborted
        assert len(result.verified) == K
        assert len(checked) == K
        assert result.dropped == 0

    def test_halt_names_first_failure(self, seed):
        """Test halt stops on the earliest rejected batch index."""
        slots, key = _batch(seed)
        slots[1] = _with_tag(slots[1], slots[1].tag + 3)
        slots[3] = _with_tag(slots[3], slots[3].tag + 3)
        result = stream_check(slots, key, IntegrityPolicy.HALT, expected_count=K)
        assert result.aborted
        assert result.abort.batch_index == 1
        assert result.abort.reason is AbortReason.MAC_REJECT
        assert result.verified == []
        assert result.abort.to_dict()["action"] == "halt"

    def test_drop_discards_and_continues(self, seed):
        """Test drop keeps the good slots and lists the bad ones."""
        slots, key = _batch(seed)
        slots[2] = _with_share_delta(slots[2], 5)
        result = stream_check(slots, key, IntegrityPolicy.DROP, expected_count=K)
        assert not result.aborted
        assert result.rejected == [2]
        assert [s.position for s in result.verified] == [0, 1, 3]

    def test_replay_halts_on_cardinality(self, seed):
        """Test a duplicated position aborts under halt."""
        slots, key = _batch(seed)
        result = stream_check([*slots, slots[0]], key, IntegrityPolicy.HALT, expected_count=K)
        assert result.aborted
        assert result.abort.reason is AbortReason.CARDINALITY
        assert result.abort.batch_index == K

    def test_replay_dropped(self, seed):
        """Test a duplicated position is discarded under drop."""
        slots, key = _batch(seed)
        result = stream_check([*slots, slots[2]], key, IntegrityPolicy.DROP, expected_count=K)
        assert result.duplicates == [K]
        assert len(result.verified) == K

    def test_missing_slot_halts(self, seed):
        """Test a dropped slot is a cardinality abort under halt."""
        slots, key = _batch(seed)
        result = stream_check(slots[:-1], key, IntegrityPolicy.HALT, expected_count=K)
        assert result.aborted
        assert result.abort.reason is AbortReason.CARDINALITY
        assert result.missing == [K - 1]

    def test_missing_slot_tolerated_under_drop(self, seed):
        """Test drop proceeds with the slots that arrived."""
        slots, key = _batch(seed)
        result = stream_check(slots[:-1], key, IntegrityPolicy.DROP, expected_count=K)
        assert not result.aborted
        assert len(result.verified) == K - 1

    def test_cross_round_slot_raises(self, seed):
        """Test a slot from another round cannot be checked with this round's key."""
        old_slots, _ = _batch(seed, round_index=0)
        _, key = _batch(seed, round_index=1)
        with pytest.raises(IntegrityError):
            stream_check(old_slots, key, IntegrityPolicy.DROP)


class TestOfflineVerify:
    """Tests for re-verifying dumped slot streams."""

    @staticmethod
    def _dump(slots: list[TaggedShare], key) -> bytes:
        transcript = RoundTranscript(round_index=key.round_index, num_clients=K, dimension=D, modulus=key.modulus)
        return transcript.with_slots(slots).to_bytes()

    def test_clean_dump(self, seed):
        """Test an honest stream has no violations."""
        slots, key = _batch(seed)
        report = offline_verify(decode_dump(self._dump(slots, key)), key)
        assert report.clean
        assert report.slots == K

    def test_tampered_tag_reported(self, seed):
        """Test a bad tag is reported with its batch index."""
        slots, key = _batch(seed)
        slots[2] = _with_tag(slots[2], slots[2].tag + 1)
        report = offline_verify(decode_dump(self._dump(slots, key)), key)
        assert report.violations == ["batch 2: MAC reject"]

    def test_truncated_dump(self, seed):
        """Test a dump cut mid-slot is flagged as truncated and short."""
        slots, key = _batch(seed)
        buf = self._dump(slots, key)
        dump = decode_dump(buf[:-10])
        assert dump.truncated
        report = offline_verify(dump, key)
        assert not report.clean
        assert any("truncated" in v for v in report.violations)
        assert any("cardinality" in v for v in report.violations)

    def test_duplicate_reported(self, seed):
        """Test a replayed slot is reported."""
        slots, key = _batch(seed)
        report = offline_verify(decode_dump(self._dump([*slots, slots[1]], key)), key)
        assert any("duplicate position 1" in v for v in report.violations)

    def test_wrong_round_key(self, seed):
        """Test a key from another round is refused."""
        slots, key = _batch(seed)
        report = offline_verify(decode_dump(self._dump(slots, key)), derive_round_key(seed, 9, D))
        assert not report.clean

    def test_bad_magic(self):
        """Test a non-dump buffer raises IntegrityError."""
        with pytest.raises(IntegrityError):
            decode_dump(b"NOTADUMP" + b"\x00" * 40)
