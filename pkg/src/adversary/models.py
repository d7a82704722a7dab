"""Attack and tamper specifications."""

import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.ring.prg import Prg, seed_from_int


class AttackKind(str, Enum):
    NONE = "none"
    LABEL_FLIP = "label_flip"
    KRUM_ATTACK = "krum_attack"
    TRIM_ATTACK = "trim_attack"
    SCALING = "scaling"
    DPFL_ADAPTIVE = "dpfl_adaptive"


class AttackSpec(BaseModel):
    """Client-side poisoning for one experiment."""

    model_config = ConfigDict(extra="forbid")

    kind: AttackKind = AttackKind.NONE
    malicious_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    trigger_fraction: float = Field(default=0.05, gt=0.0, le=1.0, description="p_trig over d_feat")
    trigger_value: float = 4.0
    target_label: int = Field(default=0, ge=0)
    poison_fraction: float = Field(default=0.5, gt=0.0, le=1.0, description="Share of local data backdoored")
    amplification: float = Field(default=10.0, gt=0.0, description="lambda_amp for scaling")

    @property
    def is_backdoor(self) -> bool:
        return self.kind in (AttackKind.SCALING, AttackKind.DPFL_ADAPTIVE)

    def trigger_features(self, d_feat: int) -> int:
        """Number of leading features overwritten by the trigger."""
        return max(1, math.ceil(self.trigger_fraction * d_feat))


class TamperTarget(str, Enum):
    SHUFFLED_SHARE = "shuffled_share"
    TAG = "tag"
    DROP = "drop"
    REPLAY = "replay"


class ServerTamperSpec(BaseModel):
    """One malicious-server deviation on one party's outgoing slot stream."""

    model_config = ConfigDict(extra="forbid")

    round: int = Field(ge=0)
    target: TamperTarget
    position: int = Field(ge=0, description="Batch index in the shuffled stream")
    delta: int = 1
    party: int = Field(default=0, ge=0, le=1)
    coordinate: int = Field(default=0, ge=0)


def select_malicious(num_clients: int, malicious_fraction: float, seed: int) -> frozenset[int]:
    """floor(rho * K) client indices, fixed by the seed."""
    count = int(math.floor(malicious_fraction * num_clients + 1e-9))
    if count == 0:
        return frozenset()
    order = Prg(seed_from_int(seed), 0, "adversary/select").permutation(num_clients)
    return frozenset(int(i) for i in np.sort(order[:count]))
