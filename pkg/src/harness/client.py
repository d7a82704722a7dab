"""One simulated client: local gradient, optional attack, clip, Sign-Gaussian, sharing."""

from dataclasses import dataclass

import numpy as np

from src.adversary.attacks import BaseAttack
from src.adversary.models import AttackSpec
from src.client.mechanism import SignUpdate, clip, encode_and_split, sign_gaussian
from src.harness.partition import ClientDataset
from src.harness.task import apply_trigger, softmax_gradient
from src.ring.prg import Prg
from src.ring.sharing import ShareVector


@dataclass(eq=False)
class LocalStep:
    """A client's round output. `raw` is the post-attack, pre-clip update."""

    client_index: int
    raw: np.ndarray
    update: SignUpdate | None = None
    shares: tuple[ShareVector, ShareVector] | None = None


def poisoned_dataset(
    data: ClientDataset,
    attack: BaseAttack,
    spec: AttackSpec,
    num_classes: int,
    rng: np.random.Generator,
) -> ClientDataset:
    """The data a malicious client trains on: flipped labels, or a backdoored subset."""
    y = attack.poison_labels(data.y, num_classes)
    x = data.x
    if spec.is_backdoor and len(y):
        n_poison = int(np.ceil(spec.poison_fraction * len(y)))
        chosen = np.sort(rng.choice(len(y), size=n_poison, replace=False))
        x = np.array(x, copy=True)
        y = np.array(y, copy=True)
        x[chosen] = apply_trigger(x[chosen], spec.trigger_features(x.shape[1]), spec.trigger_value)
        y[chosen] = spec.target_label
    return ClientDataset(data.client_index, x, y)


def local_gradient(
    data: ClientDataset,
    w: np.ndarray,
    num_classes: int,
    attack: BaseAttack | None,
    spec: AttackSpec | None,
    sigma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Full-batch gradient at w, bent by the attack when the client is malicious."""
    clean = softmax_gradient(w, data.x, data.y, num_classes)
    if attack is None or spec is None:
        return clean
    poisoned = poisoned_dataset(data, attack, spec, num_classes, rng)
    gradient = softmax_gradient(w, poisoned.x, poisoned.y, num_classes)
    return attack.craft(gradient, clean, rng, sigma)


def randomize_and_share(
    raw: np.ndarray,
    client_index: int,
    clip_bound: float,
    sigma: float,
    seed: bytes,
    round_index: int,
    modulus: int,
    share: bool,
) -> LocalStep:
    """Clip, Sign-Gaussian randomize, and optionally split the bits into two shares."""
    noise_rng = Prg(seed, round_index, f"client/{client_index}/noise").numpy_generator()
    update = sign_gaussian(clip(raw, clip_bound), sigma, noise_rng, client_hint=client_index)
    step = LocalStep(client_index=client_index, raw=raw, update=update)
    if share:
        step.shares = encode_and_split(update, Prg(seed, round_index, f"client/{client_index}/shares"), modulus)
    return step
