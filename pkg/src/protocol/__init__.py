"""
Two-server protocol: secret-shared shuffle, secure aggregation, gates,
transcripts and the round engine.
"""

from src.protocol.aggregate import (
    secure_cmp,
    secure_hamming,
    secure_relu_weight,
    secure_sign_extract,
    secure_weighted_sum,
    secure_xor,
    threshold_oracle,
)
from src.protocol.channel import DuplexChannel
from src.protocol.engine import MpcRoundResult, TwoServerAggregator
from src.protocol.gates import GateCostModel, IdealGates, ReconstructingBackend, ThresholdOutput
from src.protocol.shuffle import (
    AnonymityReport,
    ShuffleState,
    anonymity_check,
    party_view_samples,
    shuffle_apply,
    shuffle_offline,
)
from src.protocol.transcript import (
    Link,
    MessageKind,
    RoundTranscript,
    TranscriptDump,
    audit_openings,
    decode_dump,
)

__all__ = [
    "secure_cmp",
    "secure_hamming",
    "secure_relu_weight",
    "secure_sign_extract",
    "secure_weighted_sum",
    "secure_xor",
    "threshold_oracle",
    "DuplexChannel",
    "MpcRoundResult",
    "TwoServerAggregator",
    "GateCostModel",
    "IdealGates",
    "ReconstructingBackend",
    "ThresholdOutput",
    "AnonymityReport",
    "ShuffleState",
    "anonymity_check",
    "party_view_samples",
    "shuffle_apply",
    "shuffle_offline",
    "Link",
    "MessageKind",
    "RoundTranscript",
    "TranscriptDump",
    "audit_openings",
    "decode_dump",
]
