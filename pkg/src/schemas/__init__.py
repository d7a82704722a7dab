"""Pydantic schemas for experiment files and the metrics stream."""

from src.schemas.experiment import (
    AggregatorKind,
    ExperimentConfig,
    GateSection,
    RainSection,
    RunMode,
    SweepAxis,
    SweepSection,
    TaskSection,
    dump_config,
    load_config,
    parse_config,
)
from src.schemas.metrics import (
    METRICS_SCHEMA_VERSION,
    CommStats,
    ExperimentSummary,
    RoundMetrics,
    WeightSummary,
)

__all__ = [
    # Experiment
    "AggregatorKind",
    "ExperimentConfig",
    "GateSection",
    "RainSection",
    "RunMode",
    "SweepAxis",
    "SweepSection",
    "TaskSection",
    "dump_config",
    "load_config",
    "parse_config",
    # Metrics
    "METRICS_SCHEMA_VERSION",
    "CommStats",
    "ExperimentSummary",
    "RoundMetrics",
    "WeightSummary",
]
