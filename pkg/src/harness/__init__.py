"""Federated simulation harness: synthetic task, partition, round driver and metrics."""

from src.harness.diagnostics import AlignmentReport, empirical_flip_rate, alignment_check
from src.harness.metrics import MetricsWriter, comm_account, read_metrics
from src.harness.partition import ClientDataset, partition_noniid
from src.harness.runner import ExperimentRunner, FederationState, RoundRecord, run_experiment
from src.harness.task import SyntheticTask, root_direction

__all__ = [
    "AlignmentReport",
    "empirical_flip_rate",
    "alignment_check",
    "MetricsWriter",
    "comm_account",
    "read_metrics",
    "ClientDataset",
    "partition_noniid",
    "ExperimentRunner",
    "FederationState",
    "RoundRecord",
    "run_experiment",
    "SyntheticTask",
    "root_direction",
]
