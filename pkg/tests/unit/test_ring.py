"""Unit tests for the ring arithmetic layer."""

import itertools

import numpy as np
import pytest
from scipy import stats

from src.exceptions import DomainError, IntegrityError, ProtocolError
from src.ring.beaver import BeaverTriple, mul_shares
from src.ring.codec import pack_elements, pack_u32, unpack_elements
from src.ring.dealer import (
    TripleDispenser,
    TripleRole,
    compose_permutations,
    dealer_setup,
    is_bijection,
)
from src.ring.field import MERSENNE_61, PrimeRing
from src.ring.prg import Prg, seed_from_int
from src.ring.sharing import (
    SharedVector,
    concat_shared,
    constant_shared,
    negate,
    reconstruct,
    share_pair,
    split,
)


class TestPrimeRing:
    """Tests for Z_p arithmetic and the centered lift."""

    def test_encode_and_lift(self, small_ring):
        """Test signed values survive encode then centered lift."""
        encoded = small_ring.encode([-1, 5, -48, 48])
        assert list(encoded) == [96, 5, 49, 48]
        assert list(small_ring.centered_lift(encoded)) == [-1, 5, -48, 48]

    def test_encode_rejects_out_of_range(self, small_ring):
        """Test |x| > (p-1)/2 is refused."""
        with pytest.raises(DomainError):
            small_ring.encode([49])

    def test_vector_rejects_unreduced(self, small_ring):
        """Test entries outside [0, p) are refused."""
        with pytest.raises(DomainError):
            small_ring.vector([97])
        with pytest.raises(DomainError):
            small_ring.vector([-1])

    def test_rejects_float_elements(self, small_ring):
        """Test non-integer ring entries are refused."""
        with pytest.raises(DomainError):
            small_ring.vector(np.array([1.5]))

    def test_even_modulus_rejected(self):
        """Test an even modulus is refused."""
        with pytest.raises(DomainError):
            PrimeRing(96)

    def test_large_modulus_exact(self, ring):
        """Test products near 2^61 stay exact."""
        a = np.array([MERSENNE_61 - 1], dtype=object)
        assert ring.mul(a, a)[0] == 1

    def test_headroom(self, small_ring):
        """Test headroom is (p-1)/4."""
        assert small_ring.headroom == 24
        assert small_ring.fits_headroom(np.array([24, -24], dtype=object))
        assert not small_ring.fits_headroom(np.array([25], dtype=object))


class TestPrg:
    """Tests for the seeded PRG."""

    def test_deterministic(self, seed):
        """Test the same (seed, round, label) gives the same stream."""
        assert Prg(seed, 3, "x").random_bytes(64) == Prg(seed, 3, "x").random_bytes(64)

    def test_domain_separation(self, seed):
        """Test labels and rounds select independent streams."""
        base = Prg(seed, 3, "x").random_bytes(32)
        assert Prg(seed, 3, "y").random_bytes(32) != base
        assert Prg(seed, 4, "x").random_bytes(32) != base

    def test_ring_vector_in_range(self, seed):
        """Test rejection sampling stays below the modulus."""
        values = Prg(seed, 0, "r").ring_vector(5000, 97)
        assert len(values) == 5000
        assert all(0 <= int(v) < 97 for v in values)

    def test_ring_vector_uniform(self, seed):
        """Test ring vectors over Z_97 are uniform (chi-square)."""
        values = np.asarray(Prg(seed, 0, "u").ring_vector(97 * 300, 97), dtype=np.int64)
        counts = np.bincount(values, minlength=97)
        assert stats.chisquare(counts).pvalue > 0.001

    def test_permutation_is_bijection(self, seed):
        """Test Fisher-Yates output is a permutation."""
        perm = Prg(seed, 0, "p").permutation(100)
        assert is_bijection(perm, 100)

    def test_negative_seed_rejected(self):
        """Test integer seeds must be non-negative."""
        with pytest.raises(DomainError):
            seed_from_int(-1)


class TestSharing:
    """Tests for additive sharing."""

    def test_split_reconstruct(self, prg):
        """Test shares sum back to the secret."""
        s0, s1 = split([3, 0, 96], prg, 97)
        assert list(reconstruct(s0, s1)) == [3, 0, 96]
        assert s0.party == 0 and s1.party == 1

    def test_zero_vector(self, prg):
        """Test the zero vector reconstructs to zero."""
        shared = share_pair([0, 0, 0, 0], prg, 97)
        assert list(shared.reconstruct()) == [0, 0, 0, 0]

    def test_negate_cancels(self, prg):
        """Test a share plus its negation reconstructs to zero."""
        s0, _ = split([5, 17, 40], prg, 97)
        assert list(reconstruct(s0, negate(s0))) == [0, 0, 0]

    def test_same_party_rejected(self, prg):
        """Test reconstruct refuses two shares from one party."""
        s0, _ = split([1, 2], prg, 97)
        with pytest.raises(DomainError):
            reconstruct(s0, s0)

    def test_length_mismatch_rejected(self, prg):
        """Test reconstruct refuses shares of different lengths."""
        s0, _ = split([1, 2], prg, 97)
        _, t1 = split([1, 2, 3], prg, 97)
        with pytest.raises(DomainError):
            reconstruct(s0, t1)

    def test_share_is_uniform(self, seed):
        """Test one party's share of a fixed secret is uniform over Z_97."""
        prg = Prg(seed, 0, "uniform-share")
        secret = np.full(97 * 200, 5, dtype=np.int64)
        s0, _ = split(secret, prg, 97)
        counts = np.bincount(np.asarray(s0.elems, dtype=np.int64), minlength=97)
        assert stats.chisquare(counts).pvalue > 0.001

    def test_linear_ops(self, prg):
        """Test local add, scale, public add, total and concat."""
        a = share_pair([1, 2, 3], prg, 97)
        b = share_pair([10, 20, 30], prg, 97)
        assert list(a.add(b).reconstruct()) == [11, 22, 33]
        assert list(b.sub(a).reconstruct()) == [9, 18, 27]
        assert list(a.scale(2).add_public(-1).reconstruct()) == [1, 3, 5]
        assert list(a.total().reconstruct()) == [6]
        assert list(concat_shared([a, b]).reconstruct()) == [1, 2, 3, 10, 20, 30]
        assert list(constant_shared([4, 5], 97).reconstruct()) == [4, 5]

    def test_broadcast_and_select(self, prg):
        """Test a length-1 sharing repeats and entries can be picked out."""
        a = share_pair([7, 8, 9], prg, 97)
        assert list(a.select(1).broadcast(4).reconstruct()) == [8, 8, 8, 8]
        with pytest.raises(DomainError):
            a.broadcast(2)


class TestBeaver:
    """Tests for Beaver-triple multiplication."""

    @staticmethod
    def _triple(prg: Prg, n: int, p: int) -> BeaverTriple:
        ring = PrimeRing(p)
        x = prg.ring_vector(n, p)
        y = prg.ring_vector(n, p)
        return BeaverTriple(share_pair(x, prg, p), share_pair(y, prg, p), share_pair(ring.mul(x, y), prg, p))

    def test_exhaustive_small_ring(self, prg):
        """Test every product over a 10 x 10 grid in Z_97."""
        pairs = list(itertools.product(range(0, 97, 10), repeat=2))
        a = share_pair([x for x, _ in pairs], prg, 97)
        b = share_pair([y for _, y in pairs], prg, 97)
        product = mul_shares(a, b, self._triple(prg, len(pairs), 97))
        assert list(product.reconstruct()) == [(x * y) % 97 for x, y in pairs]

    def test_large_ring(self, prg, ring):
        """Test products in Z_{2^61-1} are exact."""
        x = prg.ring_vector(64, ring.modulus)
        y = prg.ring_vector(64, ring.modulus)
        out = mul_shares(
            share_pair(x, prg, ring.modulus),
            share_pair(y, prg, ring.modulus),
            self._triple(prg, 64, ring.modulus),
        )
        assert list(out.reconstruct()) == list(ring.mul(x, y))

    def test_triple_reuse_rejected(self, prg):
        """Test a triple can be consumed only once."""
        triple = self._triple(prg, 2, 97)
        a = share_pair([1, 2], prg, 97)
        mul_shares(a, a, triple)
        with pytest.raises(ProtocolError):
            mul_shares(a, a, triple)

    def test_length_mismatch_rejected(self, prg):
        """Test operands and triple must share a length."""
        a = share_pair([1, 2, 3], prg, 97)
        with pytest.raises(ProtocolError):
            mul_shares(a, a, self._triple(prg, 2, 97))


    def test_openings_uniform(self, prg):
        """Test opened e and f look uniform on Z_97 whatever the operands."""
        n, p = 50_000, 97
        opened: dict[str, np.ndarray] = {}

        def record(shared: SharedVector, label: str) -> np.ndarray:
            opened[label] = shared.reconstruct()
            return opened[label]

        a = share_pair([5] * n, prg, p)
        b = share_pair([0] * n, prg, p)
        product = mul_shares(a, b, self._triple(prg, n, p), opener=record)
        assert not any(product.reconstruct())
        for label in ("e", "f"):
            counts = np.bincount(opened[label].astype(np.int64), minlength=p)
            assert stats.chisquare(counts).pvalue > 0.001

class TestDealer:
    """Tests for the offline dealer."""

    def test_permutation_composition(self):
        """Test compose(first, second) applies first, then second."""
        first = np.array([2, 0, 1])
        second = np.array([1, 2, 0])
        values = np.array([10, 20, 30])
        assert list(values[first][second]) == list(values[compose_permutations(first, second)])

    def test_bundle_contents(self, seed):
        """Test masks cancel, triples multiply, and pi composes pi_0 and pi_1."""
        bundle = dealer_setup(seed, num_clients=4, dimension=3, round_index=0, modulus=97)
        ring = PrimeRing(97)
        assert is_bijection(bundle.permutation, 4)
        assert list(bundle.permutation) == list(compose_permutations(bundle.pi_0, bundle.pi_1))
        r0, r1 = bundle.masks
        assert all(v == 0 for v in ring.add(r0, r1).ravel())
        for role, triples in bundle.triples.items():
            for triple in triples:
                x, y, z = (t.reconstruct() for t in (triple.x, triple.y, triple.z))
                assert list(z) == list(ring.mul(x, y)), role
        assert [len(t) for t in bundle.triples[TripleRole.RELU]] == [4]
        assert len(bundle.triples[TripleRole.XOR]) == 4

    def test_bundle_deterministic(self, seed):
        """Test two expansions of the same seed serialize identically."""
        a = dealer_setup(seed, 3, 2, 5, 97).to_bytes()
        b = dealer_setup(seed, 3, 2, 5, 97).to_bytes()
        c = dealer_setup(seed, 3, 2, 6, 97).to_bytes()
        assert a == b
        assert a != c

    def test_invalid_shape(self, seed):
        """Test K and d must be positive."""
        with pytest.raises(DomainError):
            dealer_setup(seed, 0, 3, 0)

    def test_dispenser_prefix_and_exhaustion(self, seed):
        """Test short requests use a prefix and a role runs dry."""
        bundle = dealer_setup(seed, 3, 2, 0, 97)
        dispenser = TripleDispenser(bundle.triples)
        short = dispenser.take(TripleRole.RELU, 2)
        assert len(short) == 2
        assert dispenser.remaining(TripleRole.RELU) == 0
        with pytest.raises(ProtocolError):
            dispenser.take(TripleRole.RELU, 2)
        for _ in range(3):
            dispenser.take(TripleRole.XOR, 2)
        with pytest.raises(ProtocolError):
            dispenser.take(TripleRole.XOR, 2)

    def test_dispenser_counts_consumed(self, seed, prg):
        """Test only multiplied triples are reported as consumed."""
        bundle = dealer_setup(seed, 2, 3, 0, 97)
        dispenser = TripleDispenser(bundle.triples)
        triple = dispenser.take(TripleRole.XOR, 3)
        dispenser.take(TripleRole.XOR, 3)
        a = share_pair([1, 0, 1], prg, 97)
        mul_shares(a, a, triple)
        assert dispenser.consumed_lengths() == [3]


class TestCodec:
    """Tests for the wire encoding."""

    def test_element_layout(self):
        """Test a vector is a u32 count followed by 8-byte little-endian elements."""
        buf = pack_elements([1, 2**61 - 2])
        assert buf[:4] == pack_u32(2)
        assert len(buf) == 4 + 16
        values, offset = unpack_elements(buf)
        assert list(values) == [1, 2**61 - 2]
        assert offset == len(buf)

    def test_truncated_vector(self):
        """Test a short buffer raises IntegrityError."""
        buf = pack_elements([1, 2, 3])
        with pytest.raises(IntegrityError):
            unpack_elements(buf[:-3])


def test_shared_vector_requires_party_order(prg):
    """Test SharedVector refuses swapped parties."""
    s0, s1 = split([1], prg, 97)
    with pytest.raises(DomainError):
        SharedVector(s1, s0)
