"""Metrics stream schemas."""

from typing import Literal

from pydantic import BaseModel, Field

METRICS_SCHEMA_VERSION = 1


class WeightSummary(BaseModel):
    """Schema for min/median/max of normalized trust weights over one client group."""

    count: int
    min: float
    median: float
    max: float
    mean: float


class CommStats(BaseModel):
    """Schema for one round's communication accounting."""

    upload_bytes_per_client: float
    server_bytes: int
    server_elements: int
    mac_overhead_bytes: int
    total_wire_bytes: int
    interaction_rounds: int


class RoundMetrics(BaseModel):
    """Schema for one line of metrics.jsonl."""

    schema_version: int = METRICS_SCHEMA_VERSION
    record: Literal["round"] = "round"
    round: int
    accuracy: float
    asr: float | None = None
    aborted: bool = False
    abort: dict[str, int | str] | None = None
    dropped_slots: int = 0
    no_trusted_updates: bool = False
    tau: float | None = None
    weights_benign: WeightSummary | None = None
    weights_malicious: WeightSummary | None = None
    comm: CommStats | None = None
    max_abs_g: float
    dp_holds_realized: bool
    epsilon_local: float
    epsilon_amplified: float
    mode_equivalent: bool | None = None
    reference_distance: float | None = Field(
        default=None, description="Normalized Hamming distance between reference and output"
    )


class ExperimentSummary(BaseModel):
    """Schema for the final record of metrics.jsonl and the row of summary.csv."""

    schema_version: int = METRICS_SCHEMA_VERSION
    record: Literal["summary"] = "summary"
    seed: int
    mode: str
    aggregator: str
    attack: str
    rho: float
    epsilon: float
    sigma: float
    num_clients: int
    dimension: int
    rounds: int
    final_accuracy: float
    final_asr: float | None = None
    aborted_rounds: int
    no_trust_rounds: int
    mean_weight_benign: float | None = None
    mean_weight_malicious: float | None = None
    epsilon_amplified: float
    upload_bytes_per_client: float | None = None
    server_bytes_per_round: float | None = None
    mode_equivalent_rounds: int | None = None
