"""Communication accounting and the on-disk metrics stream."""

import csv
import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from src.protocol.transcript import MAC_KINDS, Link, RoundTranscript
from src.schemas.metrics import CommStats, ExperimentSummary, RoundMetrics, WeightSummary


def comm_account(transcript: RoundTranscript) -> CommStats:
    """
    Byte breakdown of one round.

    Upload bytes are per client (2 shares of d elements plus one tag). Server bytes
    cover every server-to-server message. LOCAL entries are not on the wire.
    """
    upload = transcript.total_bytes(link=Link.CLIENT_TO_SERVER)
    server = transcript.total_bytes(link=Link.SERVER_TO_SERVER)
    mac = sum(e.nbytes for e in transcript.entries if e.kind in MAC_KINDS)
    server_elements = sum(e.elements for e in transcript.entries if e.link is Link.SERVER_TO_SERVER)
    return CommStats(
        upload_bytes_per_client=upload / max(transcript.num_clients, 1),
        server_bytes=server,
        server_elements=server_elements,
        mac_overhead_bytes=mac,
        total_wire_bytes=upload + server,
        interaction_rounds=transcript.interaction_rounds,
    )


def summarize_weights(weights: np.ndarray) -> WeightSummary | None:
    if len(weights) == 0:
        return None
    arr = np.asarray(weights, dtype=np.float64)
    return WeightSummary(
        count=len(arr),
        min=float(arr.min()),
        median=float(np.median(arr)),
        max=float(arr.max()),
        mean=float(arr.mean()),
    )


def _dumps(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True)


class MetricsWriter:
    """Appends round records and the summary to metrics.jsonl, then writes summary.csv."""

    def __init__(self, run_dir: Path):
        self.run_dir = run_dir
        self.jsonl_path = run_dir / "metrics.jsonl"
        self.csv_path = run_dir / "summary.csv"
        run_dir.mkdir(parents=True, exist_ok=True)
        self.jsonl_path.write_text("")

    def write_round(self, metrics: RoundMetrics) -> None:
        with self.jsonl_path.open("a", encoding="utf-8") as fh:
            fh.write(_dumps(metrics.model_dump(mode="json")) + "\n")

    def write_summary(self, summary: ExperimentSummary) -> None:
        with self.jsonl_path.open("a", encoding="utf-8") as fh:
            fh.write(_dumps(summary.model_dump(mode="json")) + "\n")
        write_summary_csv(self.csv_path, [summary])


def write_summary_csv(path: Path, rows: Sequence[ExperimentSummary], extra: Sequence[dict[str, Any]] | None = None) -> None:
    """One CSV row per summary; `extra` columns (e.g. a sweep value) go first."""
    records = [r.model_dump(mode="json") for r in rows]
    if extra is not None:
        records = [{**e, **r} for e, r in zip(extra, records, strict=True)]
    if not records:
        return
    fields = list(records[0].keys())
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({k: "" if v is None else v for k, v in record.items()})


def read_metrics(path: Path) -> list[dict[str, Any]]:
    with path.open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
