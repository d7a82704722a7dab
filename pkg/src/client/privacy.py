"""
Shuffle amplification telemetry.

Reports how much the anonymizing shuffle tightens the per-coordinate local budget,
using the closed-form privacy-blanket bound. This is reporting only: nothing in the
pipeline depends on the amplified value.
"""

import math
from dataclasses import dataclass, field


def amplified_epsilon(epsilon_local: float, num_reports: int, delta: float) -> float:
    """
    Central epsilon after shuffling num_reports epsilon_local-LDP reports.

    Falls back to epsilon_local when the bound's precondition
    epsilon_local <= log(n / (16 log(2/delta))) does not hold.
    """
    if delta <= 0 or num_reports < 1 or not math.isfinite(epsilon_local):
        return epsilon_local
    n = num_reports
    limit_arg = n / (16.0 * math.log(2.0 / delta))
    if limit_arg <= 1.0 or epsilon_local > math.log(limit_arg):
        return epsilon_local

    e0 = math.exp(epsilon_local)
    blanket = 8.0 * math.sqrt(e0 * math.log(4.0 / delta)) / math.sqrt(n) + 8.0 * e0 / n
    amplified = math.log1p((e0 - 1.0) / (e0 + 1.0) * blanket)
    return min(amplified, epsilon_local)


@dataclass
class PrivacyLedger:
    """Per-round record of local and amplified budgets. No cross-round composition."""

    delta: float
    entries: list[tuple[int, float, float]] = field(default_factory=list)

    def record(self, round_index: int, epsilon_local: float, num_reports: int) -> float:
        amplified = amplified_epsilon(epsilon_local, num_reports, self.delta)
        self.entries.append((round_index, epsilon_local, amplified))
        return amplified

    def last(self) -> tuple[float, float] | None:
        if not self.entries:
            return None
        _, local, amplified = self.entries[-1]
        return local, amplified
