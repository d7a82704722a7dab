"""
Secret-shared shuffle of the client share lists.

Both servers apply the same composite permutation pi = pi_1 o pi_0 (expanded from the
shared seed) to their own share lists and add their half of a zero-sum mask pair, so
that out[i] reconstructs to in[pi[i]] while each party's view is freshly uniform.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from src.exceptions import DomainError, ProtocolError
from src.ring.dealer import DealerBundle
from src.ring.field import PrimeRing
from src.ring.prg import Prg
from src.ring.sharing import ShareVector, split


@dataclass(eq=False)
class ShuffleState:
    """Permutation and masks for one round; each party may apply it once."""

    round_index: int
    permutation: np.ndarray
    masks: tuple[np.ndarray, np.ndarray]
    modulus: int
    applied: set[int] = field(default_factory=set)

    @property
    def num_clients(self) -> int:
        return len(self.permutation)

    @property
    def dimension(self) -> int:
        return self.masks[0].shape[1]


def shuffle_offline(bundle: DealerBundle, num_clients: int, dimension: int) -> ShuffleState:
    """Take pi and the masks from this round's bundle."""
    if bundle.num_clients != num_clients or bundle.dimension != dimension:
        raise ProtocolError(
            f"Bundle built for K={bundle.num_clients}, d={bundle.dimension}; "
            f"round has K={num_clients}, d={dimension}"
        )
    return ShuffleState(
        round_index=bundle.round_index,
        permutation=bundle.permutation,
        masks=bundle.masks,
        modulus=bundle.modulus,
    )


def shuffle_apply(state: ShuffleState, party_shares: Sequence[ShareVector], party: int) -> list[ShareVector]:
    """
    Permute one party's shares and re-mask them: out[i] = in[pi[i]] + r_party[i].

    Args:
        state: Offline shuffle state for this round
        party_shares: K share vectors, all held by `party`
        party: 0 or 1

    Returns:
        Re-masked shares in shuffled slot order
    """
    if party not in (0, 1):
        raise DomainError(f"Party id must be 0 or 1, got {party}")
    if len(party_shares) != state.num_clients:
        raise ProtocolError(f"Expected {state.num_clients} shares, got {len(party_shares)}")
    if any(s.party != party for s in party_shares):
        raise ProtocolError(f"Shares passed with party {party}'s masks belong to another party")
    if party in state.applied:
        raise ProtocolError(f"Party {party} already consumed this round's masks")
    state.applied.add(party)

    p = state.modulus
    mask = state.masks[party]
    out = []
    for i, src_index in enumerate(state.permutation):
        source = party_shares[int(src_index)]
        if len(source) != state.dimension:
            raise ProtocolError(f"Share dimension {len(source)} != {state.dimension}")
        out.append(ShareVector(party=party, elems=(source.elems + mask[i]) % p, modulus=p))
    return out


@dataclass(frozen=True)
class AnonymityReport:
    """Two-sample comparison of one party's per-slot view across two runs."""

    statistic: float
    p_value: float
    passed: bool


def party_view_samples(
    inputs: Sequence[np.ndarray],
    permutation: np.ndarray,
    party: int,
    trials: int,
    seed: bytes,
    modulus: int,
    masking: bool = True,
) -> np.ndarray:
    """
    What one party sees in each shuffled slot over repeated runs with fresh randomness.

    The permutation is held fixed, which is the strongest position for a server that
    knows pi. With masking disabled (test hook) client sharing and re-masking are both
    switched off, so the party sees plaintext bits.

    Returns:
        Array of shape (trials, K, d) with the party's received elements
    """
    k = len(inputs)
    d = len(inputs[0])
    ring = PrimeRing(modulus)
    views = np.zeros((trials, k, d), dtype=np.int64)

    for t in range(trials):
        prg = Prg(seed, t, "anonymity")
        if masking:
            shares = [split(np.asarray(x, dtype=np.int64), prg, modulus) for x in inputs]
            r0 = prg.ring_vector(k * d, modulus).reshape(k, d)
            masks = (r0, ring.neg(r0))
        else:
            shares = [
                (ShareVector(0, ring.zeros(d), modulus), ShareVector(1, ring.vector(np.asarray(x, dtype=np.int64)), modulus))
                for x in inputs
            ]
            masks = (np.zeros((k, d), dtype=np.int64).astype(object), np.zeros((k, d), dtype=np.int64).astype(object))
        state = ShuffleState(round_index=t, permutation=np.asarray(permutation), masks=masks, modulus=modulus)
        out = shuffle_apply(state, [s[party] for s in shares], party)
        views[t] = np.array([np.asarray(o.elems, dtype=np.int64) for o in out])
    return views


def anonymity_check(view_a: np.ndarray, view_b: np.ndarray, modulus: int, alpha: float = 0.001) -> AnonymityReport:
    """
    Per-slot chi-squared homogeneity test between two runs' views.

    Values in each slot are pooled over trials and coordinates. The smallest slot
    p-value is Bonferroni-adjusted by the number of slots; the check passes when the
    adjusted p-value is at least alpha.
    """
    if view_a.shape != view_b.shape:
        raise DomainError(f"View shapes differ: {view_a.shape} != {view_b.shape}")
    num_slots = view_a.shape[1]
    worst_p = 1.0
    worst_stat = 0.0
    for slot in range(num_slots):
        counts_a = np.bincount(view_a[:, slot, :].ravel(), minlength=modulus)
        counts_b = np.bincount(view_b[:, slot, :].ravel(), minlength=modulus)
        table = np.vstack([counts_a, counts_b])
        table = table[:, table.sum(axis=0) > 0]
        if table.shape[1] < 2:
            continue
        statistic, p_value, _, _ = stats.chi2_contingency(table)
        if p_value < worst_p:
            worst_p, worst_stat = float(p_value), float(statistic)
    adjusted = min(1.0, worst_p * num_slots)
    return AnonymityReport(statistic=worst_stat, p_value=adjusted, passed=adjusted >= alpha)
