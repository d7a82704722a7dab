"""Domain objects for trust scoring and aggregation."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.exceptions import DomainError


class ReferenceSource(str, Enum):
    """Where the round's reference direction comes from."""

    ROOT_DATA = "root_data"
    PREVIOUS_ROUND = "previous_round"


class BaselineKind(str, Enum):
    MEAN = "mean"
    COORD_MEDIAN = "coord_median"
    MAJORITY_SIGN = "majority_sign"


@dataclass(frozen=True, eq=False)
class ReferenceDirection:
    """Trusted sign direction r in {-1, +1}^d."""

    signs: np.ndarray
    source: ReferenceSource = ReferenceSource.ROOT_DATA

    def __post_init__(self) -> None:
        signs = np.asarray(self.signs)
        if signs.ndim != 1 or not np.isin(signs, (-1, 1)).all():
            raise DomainError("Reference direction must be a 1-D vector of -1/+1")

    def __len__(self) -> int:
        return len(self.signs)

    @property
    def bits(self) -> np.ndarray:
        return ((np.asarray(self.signs, dtype=np.int64) + 1) // 2).astype(np.uint8)


@dataclass(frozen=True)
class TrustScore:
    """A client's normalized distance to the reference and its normalized weight."""

    distance: float
    weight: float


@dataclass(eq=False)
class WeightResult:
    """Normalized weights alpha, the raw ReLU slack max(0, tau - d_i), and the empty-support flag."""

    weights: np.ndarray
    raw: np.ndarray
    no_trusted_updates: bool = False

    def scores(self, distances: np.ndarray) -> list[TrustScore]:
        return [TrustScore(float(d), float(a)) for d, a in zip(distances, self.weights, strict=True)]


@dataclass(eq=False)
class AggregationOutcome:
    """Everything one plaintext aggregation produced, in client index order."""

    direction: np.ndarray
    distances: np.ndarray
    hamming_counts: np.ndarray
    tau: float
    weights: np.ndarray
    raw_weights: np.ndarray
    no_trusted_updates: bool = False
