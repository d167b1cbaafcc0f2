"""Greedy per-zone selection of reporting vehicles.

The ranking head is admitted first. Each further admission goes to the
non-reporter with the largest weight

    alpha * C_i + sum_j beta * I_ij,      beta = (1 - alpha) / l

where ``l`` is the current number of reporters and ``I_ij`` is 1 when the
candidate stays clear of reporter ``j``'s interference range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .fleet import Registry
from .trust import RankingList, Rankings

DEFAULT_ALPHA = 0.5
DEFAULT_RESELECT_PERIOD = 1.0


@dataclass(frozen=True)
class SelectionParams:
    m: int = 1
    alpha: float = DEFAULT_ALPHA
    interference_range: float = 100.0
    reselect_period: float = DEFAULT_RESELECT_PERIOD

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.interference_range > 0:
            raise ValueError("interference_range must be positive")
        if not self.reselect_period > 0:
            raise ValueError("reselect_period must be positive")


@dataclass(frozen=True)
class ReporterSet:
    zone: int
    members: tuple = ()  # ((vehicle_id, weight), ...); the head's weight is None
    selected_at: float = 0.0

    def __len__(self):
        return len(self.members)

    def __contains__(self, vehicle_id):
        return any(v == vehicle_id for v, _ in self.members)

    @property
    def ids(self) -> list:
        return [v for v, _ in self.members]


def _pos(v):
    return v.position if hasattr(v, "position") else v


def interferes(a, b, interference_range: float) -> int:
    """Interference indicator: 0 when within range (boundary included), else 1."""
    (ax, ay, az), (bx, by, bz) = _pos(a), _pos(b)
    dx, dy, dz = ax - bx, ay - by, az - bz
    return 0 if math.sqrt(dx * dx + dy * dy + dz * dz) <= interference_range else 1


def weight(candidate, reporters: Sequence, alpha: float, interference_range: float,
           credibility: Optional[float] = None) -> float:
    l = len(reporters)
    if l == 0:
        raise ValueError("weight needs at least one current reporter; the head is chosen by rank")
    c = candidate.credibility if credibility is None else credibility
    beta = (1.0 - alpha) / l
    return alpha * c + beta * sum(interferes(candidate, r, interference_range) for r in reporters)


def select_reporters(ranking: RankingList, registry: Registry, params: SelectionParams,
                     now: float = 0.0) -> ReporterSet:
    entries = [(vid, c) for vid, c in ranking.entries if vid in registry]
    if not entries:
        return ReporterSet(ranking.zone, (), now)
    pos = np.array([registry[vid].position for vid, _ in entries], dtype=np.float64)
    cred = np.array([c for _, c in entries], dtype=np.float64)
    interf = (kernels.distance_matrix(pos) <= params.interference_range).astype(np.uint8)
    chosen, weights = kernels.greedy_select(cred, interf, int(params.m), float(params.alpha))
    members = tuple(
        (entries[i][0], None if k == 0 else float(w))
        for k, (i, w) in enumerate(zip(chosen, weights))
    )
    return ReporterSet(ranking.zone, members, now)


def reselect_tick(rankings: Rankings, registry: Registry, params: SelectionParams,
                  now: float) -> dict:
    """Fresh reporter sets for every populated zone."""
    phase = now / params.reselect_period
    if abs(phase - round(phase)) > 1e-6:
        raise ValueError(f"reselect tick at t={now} is off the {params.reselect_period}s period")
    return {
        zone: select_reporters(rankings.lists[zone], registry, params, now)
        for zone in sorted(rankings.lists)
    }
