"""Credibility sources and per-zone descending-credibility ranking lists."""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Optional

from .fleet import EXPIRED, JOINED, MOVED, Delta, Registry, _norm_id, id_key


class RankingError(RuntimeError):
    pass


class CredibilityUnavailable(LookupError):
    """The oracle could not answer yet; retry on a later sync."""


def _check_cred(value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"credibility must lie in [0, 1], got {value!r}")
    return value


# -- oracles ----------------------------------------------------------------

class StaticTable:
    """Fixed credibility per vehicle; unknown ids get ``default``."""

    def __init__(self, table: Optional[dict] = None, default: Optional[float] = None):
        self.table = {k: _check_cred(v) for k, v in (table or {}).items()}
        self.default = None if default is None else _check_cred(default)

    def get(self, vehicle_id, now: float = 0.0) -> float:
        try:
            return self.table[vehicle_id]
        except KeyError:
            if self.default is None:
                raise CredibilityUnavailable(f"no credibility for vehicle {vehicle_id!r}") from None
            return self.default

    def update(self, vehicle_id, value: float, now: float = 0.0) -> None:
        self.table[vehicle_id] = _check_cred(value)


class BlockchainMock(StaticTable):
    """Append-only ledger shared by every RSU that holds the same ``chain``.

    Lookups return the latest committed value for the vehicle.
    """

    def __init__(self, table: Optional[dict] = None, default: Optional[float] = None,
                 chain: Optional[list] = None):
        super().__init__(default=default)
        self.chain = chain if chain is not None else []
        self._height = 0
        for vid, value in (table or {}).items():
            self.update(vid, value)

    def _catch_up(self) -> None:
        # Other holders of the chain may have appended blocks.
        for _, vid, value in self.chain[self._height:]:
            self.table[vid] = value
        self._height = len(self.chain)

    def update(self, vehicle_id, value: float, now: float = 0.0) -> None:
        self.chain.append((now, vehicle_id, _check_cred(value)))
        self._catch_up()

    def get(self, vehicle_id, now: float = 0.0) -> float:
        self._catch_up()
        return super().get(vehicle_id, now)


class CloudMock(StaticTable):
    """Remote lookup answered ``latency`` seconds (simulation time) after first request."""

    def __init__(self, table: Optional[dict] = None, default: Optional[float] = None,
                 latency: float = 0.0):
        super().__init__(table, default)
        if latency < 0:
            raise ValueError("latency must be non-negative")
        self.latency = float(latency)
        self.pending: dict = {}

    def get(self, vehicle_id, now: float = 0.0) -> float:
        asked = self.pending.setdefault(vehicle_id, now)
        if now - asked < self.latency - 1e-12:
            raise CredibilityUnavailable(f"cloud lookup for {vehicle_id!r} pending")
        del self.pending[vehicle_id]
        return super().get(vehicle_id, now)


def load_credibility_table(path) -> dict:
    """CSV with header ``vehicle_id,credibility``."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            vid = _norm_id(row["vehicle_id"])
            if vid in out:
                raise ValueError(f"{path}: duplicate vehicle id {vid!r}")
            out[vid] = _check_cred(row["credibility"])
    return out


def dump_credibility_table(table: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vehicle_id", "credibility"])
        for vid in sorted(table, key=id_key):
            w.writerow([vid, repr(table[vid])])


# -- ranking lists ----------------------------------------------------------

def _rank_key(entry):
    vid, cred = entry
    return (-cred, id_key(vid))


@dataclass
class RankingList:
    zone: int
    entries: list = field(default_factory=list)  # [(vehicle_id, credibility)], best first

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, vehicle_id):
        return any(v == vehicle_id for v, _ in self.entries)

    @property
    def ids(self) -> list:
        return [v for v, _ in self.entries]

    def insert(self, vehicle_id, credibility: float) -> "RankingList":
        if vehicle_id in self:
            raise RankingError(f"vehicle {vehicle_id!r} already ranked in zone {self.zone}")
        bisect.insort(self.entries, (vehicle_id, _check_cred(credibility)), key=_rank_key)
        return self

    def remove(self, vehicle_id) -> "RankingList":
        self.entries = [e for e in self.entries if e[0] != vehicle_id]
        return self


def ranking_insert(ranking: RankingList, vehicle_id, credibility: float) -> RankingList:
    return ranking.insert(vehicle_id, credibility)


def ranking_remove(ranking: RankingList, vehicle_id) -> RankingList:
    return ranking.remove(vehicle_id)


class Rankings:
    """All zones' ranking lists plus the queue of vehicles awaiting credibility."""

    def __init__(self, oracle):
        self.oracle = oracle
        self.lists: dict[int, RankingList] = {}
        self.where: dict = {}  # vehicle_id -> zone it is ranked in
        self.pending: dict = {}  # vehicle_id -> zone awaiting an oracle answer

    def __getitem__(self, zone: int) -> RankingList:
        return self.lists.get(zone) or RankingList(zone)

    def _insert(self, vid, zone, registry: Optional[Registry], now) -> None:
        try:
            cred = self.oracle.get(vid, now)
        except CredibilityUnavailable:
            self.pending[vid] = zone
            return
        self.pending.pop(vid, None)
        self.lists.setdefault(zone, RankingList(zone)).insert(vid, cred)
        self.where[vid] = zone
        if registry is not None and vid in registry:
            registry[vid].credibility = cred

    def _drop(self, vid) -> None:
        self.pending.pop(vid, None)
        zone = self.where.pop(vid, None)
        if zone is not None:
            self.lists[zone].remove(vid)
            if not self.lists[zone].entries:
                del self.lists[zone]

    def sync(self, deltas: Iterable[Delta], now: float = 0.0,
             registry: Optional[Registry] = None) -> set:
        """Apply registry deltas; returns the set of zones whose list changed."""
        touched = set()
        for vid in sorted(self.pending, key=id_key):
            zone = self.pending[vid]
            self._insert(vid, zone, registry, now)
            if vid in self.where:
                touched.add(zone)
        for d in deltas:
            if d.kind == JOINED:
                if d.new_zone is not None:
                    self._insert(d.vehicle_id, d.new_zone, registry, now)
                    touched.add(d.new_zone)
            elif d.kind == MOVED:
                was = self.where.get(d.vehicle_id)
                self._drop(d.vehicle_id)
                if was is not None:
                    touched.add(was)
                if d.new_zone is not None:
                    self._insert(d.vehicle_id, d.new_zone, registry, now)
                    touched.add(d.new_zone)
            elif d.kind == EXPIRED:
                was = self.where.get(d.vehicle_id)
                self._drop(d.vehicle_id)
                if was is not None:
                    touched.add(was)
        return touched

    def refresh(self, vehicle_id, now: float = 0.0, registry: Optional[Registry] = None) -> None:
        """Re-read one vehicle's credibility (after a scripted update)."""
        zone = self.where.get(vehicle_id)
        if zone is None:
            return
        self._drop(vehicle_id)
        self._insert(vehicle_id, zone, registry, now)

    def snapshot(self) -> dict:
        return {z: list(rl.entries) for z, rl in sorted(self.lists.items())}


def sync_rankings(rankings: Rankings, deltas: Iterable[Delta], now: float = 0.0,
                  registry: Optional[Registry] = None) -> set:
    return rankings.sync(deltas, now, registry)
