"""Report loss rate and average report delay."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .netsim import RSU, Frame, Outcome


class AccountingError(ValueError):
    pass


def report_loss_rate(r_t: int, r_r: int) -> float:
    if r_r < 0 or r_t < 0:
        raise AccountingError("report counts must be non-negative")
    if r_r > r_t:
        raise AccountingError(f"received {r_r} reports but only {r_t} were sent")
    if r_t == 0:
        return 0.0
    return (r_t - r_r) / r_t


def average_report_delay(delays: Sequence[float]) -> Optional[float]:
    """Mean delay over delivered reports, or None when nothing was delivered."""
    if any(d < 0 for d in delays):
        raise AccountingError("negative report delay")
    if not delays:
        return None
    return math.fsum(delays) / len(delays)


@dataclass(frozen=True)
class RunMetrics:
    r_t: int
    r_r: int
    delays: tuple = field(default=(), repr=False)

    @property
    def rlr(self) -> float:
        return report_loss_rate(self.r_t, self.r_r)

    @property
    def ard(self) -> Optional[float]:
        return average_report_delay(self.delays)


def from_records(records: Iterable[tuple]) -> RunMetrics:
    """Build metrics from ``(outcome_at_rsu, enqueue_time, tx_end)`` per sent report."""
    r_t = 0
    delays = []
    for outcome, enq, end in records:
        r_t += 1
        if outcome == Outcome.DELIVERED.value:
            delays.append(end - enq)
    return RunMetrics(r_t, len(delays), tuple(delays))


def from_frames(frames: Iterable[Frame]) -> RunMetrics:
    recs = []
    for f in frames:
        if f.kind != "report":
            continue
        outcome = f.outcomes.get(RSU)
        recs.append((None if outcome is None else outcome.value, f.enqueue_time, f.tx_end))
    return from_records(recs)
