"""Offline re-verification of a dumped slot stream."""

from dataclasses import dataclass, field

import numpy as np

from src.integrity.mac import MacKey, Verdict, mac_verify
from src.protocol.transcript import TranscriptDump


@dataclass
class VerifyReport:
    """Violations found in one dump, each naming a batch index where one applies."""

    round_index: int
    slots: int
    violations: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations


def offline_verify(dump: TranscriptDump, key: MacKey) -> VerifyReport:
    """Re-check every tag and exactly-once delivery of positions 0..K-1."""
    report = VerifyReport(round_index=dump.round_index, slots=len(dump.slots))
    if key.round_index != dump.round_index:
        report.violations.append(f"key for round {key.round_index} does not match dump round {dump.round_index}")
        return report

    seen: set[int] = set()
    for index, slot in enumerate(dump.slots):
        out_of_range = any(
            bool(np.any(slot.shares.share(p).elems >= dump.modulus)) for p in (0, 1)
        )
        if out_of_range:
            report.violations.append(f"batch {index}: element outside [0, p)")
        elif mac_verify(slot, key) is Verdict.REJECT:
            report.violations.append(f"batch {index}: MAC reject")
        if slot.position in seen:
            report.violations.append(f"batch {index}: duplicate position {slot.position}")
        seen.add(slot.position)

    if dump.truncated:
        report.violations.append(f"truncated after {len(dump.slots)} complete slots")
    if dump.declared_count != len(dump.slots):
        report.violations.append(f"header declares {dump.declared_count} slots, found {len(dump.slots)}")
    missing = [p for p in range(dump.num_clients) if p not in seen]
    if missing:
        report.violations.append(f"cardinality: {len(missing)} position(s) missing")
    return report
