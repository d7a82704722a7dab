"""Probabilistic non-IID partition of the training split."""

from dataclasses import dataclass

import numpy as np

from src.exceptions import DomainError
from src.ring.prg import Prg, seed_from_int


@dataclass(eq=False)
class ClientDataset:
    client_index: int
    x: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.y)


def group_members(num_clients: int, num_classes: int) -> list[list[int]]:
    """
    Clients belonging to each of the M label groups.

    Clients join groups round-robin; when K < M a client holds several groups.
    """
    if num_clients >= num_classes:
        return [[i for i in range(num_clients) if i % num_classes == g] for g in range(num_classes)]
    return [[g % num_clients] for g in range(num_classes)]


def partition_indices(labels: np.ndarray, num_clients: int, num_classes: int, q: float, seed: int) -> list[np.ndarray]:
    """
    Route each example to a group, then to a client of that group.

    An example with label l joins group l with probability q, otherwise one of the other
    M - 1 groups uniformly. Within a group the client is uniform.
    """
    if num_clients < 1:
        raise DomainError(f"K must be at least 1, got {num_clients}")
    if not 1.0 / num_classes - 1e-12 <= q <= 1.0:
        raise DomainError(f"q must lie in [1/M, 1], got {q}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise DomainError(f"Labels must lie in [0, {num_classes})")

    rng = Prg(seed_from_int(seed), 0, "partition").numpy_generator()
    members = group_members(num_clients, num_classes)
    assigned: list[list[int]] = [[] for _ in range(num_clients)]

    for idx, label in enumerate(labels):
        if rng.random() < q:
            group = int(label)
        else:
            other = int(rng.integers(0, num_classes - 1))
            group = other if other < label else other + 1
        clients = members[group]
        assigned[clients[int(rng.integers(0, len(clients)))]].append(idx)

    return [np.asarray(a, dtype=np.int64) for a in assigned]


def partition_noniid(
    x: np.ndarray,
    y: np.ndarray,
    num_clients: int,
    num_classes: int,
    q: float,
    seed: int,
) -> list[ClientDataset]:
    """Split (x, y) into K client datasets; q = 1/M is IID, q = 1 is one label per group."""
    parts = partition_indices(y, num_clients, num_classes, q, seed)
    return [ClientDataset(i, x[idx], y[idx]) for i, idx in enumerate(parts)]
