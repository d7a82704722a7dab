"""
Client-side poisoning attacks.

Malicious clients run these on their local pipeline before clipping and
randomization. Every attack is deterministic given its inputs and rng.
"""

from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import Any

import numpy as np

from src.adversary.models import AttackKind, AttackSpec
from src.exceptions import DomainError

# Fixed search grid and norm cap for the Krum attack
KRUM_GAMMA_GRID = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
KRUM_NORM_CAP = 10.0


def label_flip(labels: Any, num_classes: int) -> np.ndarray:
    """l -> M - l - 1."""
    arr = np.asarray(labels, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
        raise DomainError(f"Labels must lie in [0, {num_classes})")
    return num_classes - arr - 1


def scaling_attack(update: Any, amplification: float) -> np.ndarray:
    if amplification <= 0:
        raise DomainError(f"Amplification must be positive, got {amplification}")
    return amplification * np.asarray(update, dtype=np.float64)


def dpfl_adaptive(
    poison_grad: Any,
    benign_template: Any,
    sigma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Rescale the poisoned gradient to the norm of a noisy benign update.

    S_u = benign_template + N(0, sigma^2), A = ||S_u|| / ||G_u||, returns A * G_u.
    """
    g_u = np.asarray(poison_grad, dtype=np.float64)
    norm_g = float(np.linalg.norm(g_u))
    if norm_g == 0.0:
        raise DomainError("Poison gradient has zero norm")
    template = np.asarray(benign_template, dtype=np.float64)
    if template.shape != g_u.shape:
        raise DomainError(f"Template shape {template.shape} != gradient shape {g_u.shape}")
    noisy = template + rng.normal(0.0, sigma, size=template.shape) if sigma > 0 else template
    return (float(np.linalg.norm(noisy)) / norm_g) * g_u


def _benign_matrix(benign_updates: Sequence[Any]) -> np.ndarray:
    if len(benign_updates) == 0:
        raise DomainError("The adversary needs at least one benign update")
    return np.stack([np.asarray(u, dtype=np.float64) for u in benign_updates])


def krum_attack(benign_updates: Sequence[Any], n_malicious: int) -> list[np.ndarray]:
    """
    Every malicious client sends u* = -gamma * mean(benign).

    gamma is the largest grid value whose update respects ||u*|| <= 10 * mean benign norm,
    which maximizes the distance to the benign mean while the malicious set stays a
    single point.
    """
    matrix = _benign_matrix(benign_updates)
    mean = matrix.mean(axis=0)
    cap = KRUM_NORM_CAP * float(np.mean(np.linalg.norm(matrix, axis=1)))
    mean_norm = float(np.linalg.norm(mean))
    gamma = KRUM_GAMMA_GRID[0]
    for candidate in KRUM_GAMMA_GRID:
        if candidate * mean_norm <= cap:
            gamma = candidate
    crafted = -gamma * mean
    return [crafted.copy() for _ in range(n_malicious)]


def trim_attack(benign_updates: Sequence[Any], n_malicious: int) -> list[np.ndarray]:
    """Per coordinate, the benign min where the benign mean is positive and the max otherwise."""
    matrix = _benign_matrix(benign_updates)
    mean = matrix.mean(axis=0)
    crafted = np.where(mean > 0, matrix.min(axis=0), matrix.max(axis=0))
    return [crafted.copy() for _ in range(n_malicious)]


class BaseAttack(ABC):
    """How a malicious client bends its own pipeline."""

    def __init__(self, spec: AttackSpec):
        self.spec = spec

    @property
    @abstractmethod
    def kind(self) -> AttackKind: ...

    @property
    def requires_benign_grads(self) -> bool:
        return False

    def poison_labels(self, labels: np.ndarray, num_classes: int) -> np.ndarray:
        """Labels the malicious client trains on."""
        return labels

    def craft(
        self,
        gradient: np.ndarray,
        clean_gradient: np.ndarray,
        rng: np.random.Generator,
        sigma: float,
    ) -> np.ndarray:
        """Final pre-clip update from the client's (possibly poisoned) gradient."""
        return gradient

    def craft_collective(self, benign: Sequence[np.ndarray], n_malicious: int) -> list[np.ndarray]:
        raise NotImplementedError(f"{self.kind.value} does not craft collectively")


class NoAttack(BaseAttack):
    @property
    def kind(self) -> AttackKind:
        return AttackKind.NONE


class LabelFlipAttack(BaseAttack):
    @property
    def kind(self) -> AttackKind:
        return AttackKind.LABEL_FLIP

    def poison_labels(self, labels: np.ndarray, num_classes: int) -> np.ndarray:
        return label_flip(labels, num_classes)


class ScalingAttack(BaseAttack):
    """Backdoored local data, amplified update."""

    @property
    def kind(self) -> AttackKind:
        return AttackKind.SCALING

    def craft(self, gradient, clean_gradient, rng, sigma):
        return scaling_attack(gradient, self.spec.amplification)


class DpflAdaptiveAttack(BaseAttack):
    """Backdoored local data, rescaled to look like a noisy benign update."""

    @property
    def kind(self) -> AttackKind:
        return AttackKind.DPFL_ADAPTIVE

    def craft(self, gradient, clean_gradient, rng, sigma):
        if not np.any(gradient):
            return gradient
        return dpfl_adaptive(gradient, clean_gradient, sigma, rng)


class KrumAttack(BaseAttack):
    @property
    def kind(self) -> AttackKind:
        return AttackKind.KRUM_ATTACK

    @property
    def requires_benign_grads(self) -> bool:
        return True

    def craft_collective(self, benign, n_malicious):
        return krum_attack(benign, n_malicious)


class TrimAttack(BaseAttack):
    @property
    def kind(self) -> AttackKind:
        return AttackKind.TRIM_ATTACK

    @property
    def requires_benign_grads(self) -> bool:
        return True

    def craft_collective(self, benign, n_malicious):
        return trim_attack(benign, n_malicious)


ATTACK_REGISTRY: dict[AttackKind, type[BaseAttack]] = {
    AttackKind.NONE: NoAttack,
    AttackKind.LABEL_FLIP: LabelFlipAttack,
    AttackKind.SCALING: ScalingAttack,
    AttackKind.DPFL_ADAPTIVE: DpflAdaptiveAttack,
    AttackKind.KRUM_ATTACK: KrumAttack,
    AttackKind.TRIM_ATTACK: TrimAttack,
}


def build_attack(spec: AttackSpec) -> BaseAttack:
    return ATTACK_REGISTRY[spec.kind](spec)
