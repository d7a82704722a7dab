"""
Aggregation phase over additive shares: secure Hamming distance, ReLU trust weights, the weighted
sign sum and sign extraction.

All operands are `SharedVector`s. Multiplications consume Beaver triples and open their
masked differences through the supplied opener; comparisons go through `IdealGates`.
"""

from collections.abc import Sequence

from src.exceptions import ProtocolError
from src.protocol.gates import IdealGates, ThresholdOutput
from src.ring.beaver import BeaverTriple, Opener, mul_shares
from src.ring.field import PrimeRing
from src.ring.sharing import SharedVector, constant_shared


def secure_xor(
    a: SharedVector,
    b: SharedVector,
    triple: BeaverTriple,
    opener: Opener | None = None,
) -> SharedVector:
    """a XOR b = a + b - 2ab for bit operands. Non-bit inputs are not detected."""
    ab = mul_shares(a, b, triple, opener)
    return a.add(b).sub(ab.scale(2))


def secure_hamming(
    bits: SharedVector,
    reference_bits: SharedVector,
    triple: BeaverTriple,
    opener: Opener | None = None,
) -> SharedVector:
    """Length-1 sharing of the number of coordinates where the two bit vectors differ."""
    return secure_xor(bits, reference_bits, triple, opener).total()


def secure_cmp(x: SharedVector, y: SharedVector, gates: IdealGates) -> SharedVector:
    """Shares of 1 where x >= y under the centered lift."""
    return gates.cmp(x, y)


def secure_relu_weight(
    tau: SharedVector,
    hd: SharedVector,
    triple: BeaverTriple,
    gates: IdealGates,
    opener: Opener | None = None,
) -> SharedVector:
    """
    w_i = (tau - hd_i) * Cmp(tau, hd_i) for every client at once.

    Args:
        tau: Length-1 sharing of tau_int
        hd: Length-K sharing of Hamming counts
        triple: One triple of length K
        gates: Comparison gate for this round
        opener: Channel opener for the multiplication

    Returns:
        Length-K sharing of max(0, tau_int - hd_i)
    """
    tau_k = tau.broadcast(len(hd))
    keep = gates.cmp(tau_k, hd, label="relu")
    return mul_shares(tau_k.sub(hd), keep, triple, opener)


def secure_weighted_sum(
    weights: SharedVector,
    sign_bits: Sequence[SharedVector],
    triples: Sequence[BeaverTriple],
    opener: Opener | None = None,
    weight_bound: int | None = None,
) -> SharedVector:
    """
    z = sum_i w_i * (2 b_i - 1), accumulated in slot order.

    The bit-to-sign map is affine, so it costs no multiplication. weight_bound caps
    |w_i| for the headroom check and defaults to d, the largest possible tau_int.
    """
    if len(weights) != len(sign_bits) or len(sign_bits) != len(triples):
        raise ProtocolError(
            f"{len(weights)} weights, {len(sign_bits)} updates and {len(triples)} triples"
        )
    if not sign_bits:
        raise ProtocolError("Weighted sum over an empty batch")

    d = len(sign_bits[0])
    ring = PrimeRing(weights.modulus)
    bound = d if weight_bound is None else weight_bound
    if len(sign_bits) * bound > ring.headroom:
        raise ProtocolError(f"K * max_w = {len(sign_bits) * bound} exceeds headroom {ring.headroom}")

    z = constant_shared(ring.zeros(d), weights.modulus)
    for i, (bits, triple) in enumerate(zip(sign_bits, triples, strict=True)):
        signs = bits.scale(2).add_public(-1)
        z = z.add(mul_shares(weights.select(i).broadcast(d), signs, triple, opener))
    return z


def secure_sign_extract(z: SharedVector, gates: IdealGates) -> SharedVector:
    """s_j = 2 * Cmp(z_j, 0) - 1, so z_j = 0 maps to +1."""
    zero = constant_shared(gates.ring.zeros(len(z)), z.modulus)
    return gates.cmp(z, zero, label="sign").scale(2).add_public(-1)


def threshold_oracle(hd: SharedVector, lambda_mad: float, gates: IdealGates) -> ThresholdOutput:
    """tau_int shares from the anonymized Hamming counts."""
    return gates.threshold(hd, lambda_mad)
