"""Vehicle mobility, Hello beacons and the RSU-side vehicle registry."""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Optional

from .geometry import Point3, Tiling, as_point

HELLO_INTERVAL = 0.1
EXPIRY_PERIODS = 3
# Slack for float noise in timestamps built from multiples of the Hello interval.
TIME_EPS = 1e-9


class TraceError(ValueError):
    pass


def id_key(vehicle_id: Hashable):
    """Sort key giving a total order over mixed int/str vehicle ids."""
    if isinstance(vehicle_id, int):
        return (0, vehicle_id, "")
    return (1, 0, str(vehicle_id))


def tick_time(k: int, interval: float) -> float:
    return round(k * interval, 9)


@dataclass(frozen=True)
class MobilityTrace:
    """Piecewise-linear trajectory through timed waypoints."""

    vehicle_id: Hashable
    times: tuple[float, ...]
    points: tuple[Point3, ...]
    credibility: Optional[float] = None

    def __post_init__(self):
        if len(self.times) != len(self.points) or not self.times:
            raise TraceError(f"vehicle {self.vehicle_id!r}: need matching, non-empty waypoints")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise TraceError(f"vehicle {self.vehicle_id!r}: waypoint times must strictly increase")

    @classmethod
    def from_waypoints(cls, vehicle_id, waypoints, credibility=None) -> "MobilityTrace":
        times = tuple(float(w[0]) for w in waypoints)
        points = tuple(as_point(w[1:4] if len(w) == 4 else w[1]) for w in waypoints)
        return cls(vehicle_id, times, points, credibility)

    @classmethod
    def straight(cls, vehicle_id, anchor, velocity, anchor_time, start, end, credibility=None):
        """Constant-velocity trace passing through ``anchor`` at ``anchor_time``."""
        ax, ay, az = anchor
        vx, vy, vz = velocity
        wps = []
        for t in (start, end):
            dt = t - anchor_time
            wps.append((t, (ax + vx * dt, ay + vy * dt, az + vz * dt)))
        if end == start:
            wps = wps[:1]
        return cls.from_waypoints(vehicle_id, wps, credibility)

    @property
    def start(self) -> float:
        return self.times[0]

    @property
    def end(self) -> float:
        return self.times[-1]

    def _segment(self, t: float) -> int:
        if t < self.start - TIME_EPS or t > self.end + TIME_EPS:
            raise TraceError(
                f"t={t} outside trace span [{self.start}, {self.end}] of vehicle {self.vehicle_id!r}"
            )
        i = bisect.bisect_right(self.times, t) - 1
        return min(max(i, 0), max(len(self.times) - 2, 0))

    def position_at(self, t: float) -> Point3:
        i = self._segment(t)
        if len(self.times) == 1:
            return self.points[0]
        t0, t1 = self.times[i], self.times[i + 1]
        if t <= t0:
            return self.points[i]
        if t >= t1:
            return self.points[i + 1]
        f = (t - t0) / (t1 - t0)
        p0, p1 = self.points[i], self.points[i + 1]
        return Point3(*(a + (b - a) * f for a, b in zip(p0, p1)))

    def speed_at(self, t: float) -> float:
        i = self._segment(t)
        if len(self.times) == 1:
            return 0.0
        return self.points[i].dist(self.points[i + 1]) / (self.times[i + 1] - self.times[i])


def position_at(trace: MobilityTrace, t: float) -> Point3:
    return trace.position_at(t)


@dataclass(frozen=True)
class HelloMessage:
    vehicle_id: Hashable
    position: Point3
    speed: float
    timestamp: float


def emit_hellos(trace: MobilityTrace, interval: float = HELLO_INTERVAL,
                span: Optional[tuple[float, float]] = None) -> list[HelloMessage]:
    """One Hello at every multiple of ``interval`` inside ``span`` (inclusive)."""
    if not interval > 0:
        raise ValueError(f"Hello interval must be positive, got {interval!r}")
    start, end = span if span is not None else (trace.start, trace.end)
    k0 = math.ceil(start / interval - TIME_EPS)
    k1 = math.floor(end / interval + TIME_EPS)
    out = []
    for k in range(k0, k1 + 1):
        t = min(max(tick_time(k, interval), trace.start), trace.end)
        out.append(HelloMessage(trace.vehicle_id, trace.position_at(t), trace.speed_at(t), tick_time(k, interval)))
    return out


# -- registry ---------------------------------------------------------------

JOINED, MOVED, REFRESHED, EXPIRED = "joined", "moved", "refreshed", "expired"


@dataclass(frozen=True)
class Delta:
    kind: str
    vehicle_id: Hashable
    old_zone: Optional[int] = None
    new_zone: Optional[int] = None


@dataclass
class VehicleRecord:
    vehicle_id: Hashable
    position: Point3
    speed: float
    last_hello: float
    zone: Optional[int] = None
    credibility: Optional[float] = None


@dataclass
class Registry:
    records: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def __contains__(self, vehicle_id):
        return vehicle_id in self.records

    def __getitem__(self, vehicle_id) -> VehicleRecord:
        return self.records[vehicle_id]

    def values(self):
        return self.records.values()

    def in_zone(self, zone: int) -> list[VehicleRecord]:
        return [r for r in self.records.values() if r.zone == zone]

    def apply(self, msg: HelloMessage, tiling: Tiling) -> Delta:
        zone = tiling.locate(msg.position)
        rec = self.records.get(msg.vehicle_id)
        if rec is None:
            self.records[msg.vehicle_id] = VehicleRecord(
                msg.vehicle_id, msg.position, msg.speed, msg.timestamp, zone
            )
            return Delta(JOINED, msg.vehicle_id, None, zone)
        old = rec.zone
        rec.position, rec.speed, rec.last_hello, rec.zone = msg.position, msg.speed, msg.timestamp, zone
        if old != zone:
            return Delta(MOVED, msg.vehicle_id, old, zone)
        return Delta(REFRESHED, msg.vehicle_id, old, zone)

    def expire_stale(self, now: float, hello_interval: float = HELLO_INTERVAL,
                     k_periods: int = EXPIRY_PERIODS) -> list[Delta]:
        if k_periods < 1:
            raise ValueError("k_periods must be >= 1")
        limit = k_periods * hello_interval + TIME_EPS
        gone = [vid for vid, r in self.records.items() if now - r.last_hello > limit]
        gone.sort(key=id_key)
        return [Delta(EXPIRED, vid, self.records.pop(vid).zone, None) for vid in gone]


def registry_apply(registry: Registry, msg: HelloMessage, tiling: Tiling) -> Delta:
    return registry.apply(msg, tiling)


def expire_stale(registry: Registry, now: float, hello_interval: float = HELLO_INTERVAL,
                 k_periods: int = EXPIRY_PERIODS) -> list:
    """Drop vehicles silent for more than ``k_periods`` Hello intervals; return their ids."""
    return [d.vehicle_id for d in registry.expire_stale(now, hello_interval, k_periods)]


# -- trace files ------------------------------------------------------------

def _norm_id(raw):
    if isinstance(raw, bool):
        raise TraceError(f"invalid vehicle id {raw!r}")
    if isinstance(raw, int):
        return raw
    text = str(raw).strip()
    return int(text) if text.lstrip("-").isdigit() else text


def load_traces(path) -> list[MobilityTrace]:
    """Read a trace file.

    JSON object ``{"vehicles": [{"id": ..., "credibility": 0.8,
    "waypoints": [[t, x, y, z], ...]}, ...]}``; credibility is optional.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    vehicles = data["vehicles"] if isinstance(data, dict) else data
    traces = []
    seen = set()
    for i, v in enumerate(vehicles):
        try:
            vid = _norm_id(v["id"])
            wps = v["waypoints"]
        except (KeyError, TypeError) as exc:
            raise TraceError(f"vehicles[{i}]: missing field {exc}") from None
        if vid in seen:
            raise TraceError(f"vehicles[{i}]: duplicate id {vid!r}")
        seen.add(vid)
        cred = v.get("credibility")
        traces.append(MobilityTrace.from_waypoints(vid, wps, None if cred is None else float(cred)))
    return traces


def dump_traces(traces: Iterable[MobilityTrace], path) -> None:
    out = []
    for tr in traces:
        entry = {"id": tr.vehicle_id}
        if tr.credibility is not None:
            entry["credibility"] = tr.credibility
        entry["waypoints"] = [[t, *p] for t, p in zip(tr.times, tr.points)]
        out.append(entry)
    body = ",\n".join("  " + json.dumps(e) for e in out)
    Path(path).write_text('{"vehicles": [\n' + body + "\n]}\n", encoding="utf-8")
