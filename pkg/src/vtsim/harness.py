"""Scenario execution: world setup, reporting strategies, sweeps and aggregation."""

from __future__ import annotations

import enum
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import selection as sel
from .config import ScenarioConfig
from .fleet import (
    MobilityTrace, Registry, emit_hellos, id_key, load_traces, tick_time,
)
from .geometry import Point3, Tiling, as_point, build_tiling
from .metrics import RunMetrics, from_frames
from .netsim import BROADCAST, RSU, Channel, Frame, RadioConfig
from .trust import BlockchainMock, CloudMock, Rankings, StaticTable, load_credibility_table


class Strategy(str, enum.Enum):
    VTS = "VTS"
    BROADCAST_ALL = "BROADCAST_ALL"
    NEARBY_REPORT = "NEARBY_REPORT"


@lru_cache(maxsize=32)
def _tiling(r: float, d: float, mode: str, cap: int) -> Tiling:
    return build_tiling(r, d, mode, zone_cap=cap)


def tiling_for(cfg: ScenarioConfig) -> Tiling:
    t = cfg["tiling"]
    return _tiling(float(t["r"]), float(t["d"]), str(t["mode"]).lower(), int(t["zone_cap"]))


def radio_for(cfg: ScenarioConfig) -> RadioConfig:
    return RadioConfig(**cfg["radio"])


def selection_for(cfg: ScenarioConfig) -> sel.SelectionParams:
    s = cfg["selection"]
    rng_ = s["interference_range"]
    return sel.SelectionParams(
        m=s["m"], alpha=s["alpha"],
        interference_range=cfg["radio"]["cs_range"] if rng_ is None else rng_,
        reselect_period=s["reselect_period"],
    )


def event_position(cfg: ScenarioConfig, tiling: Tiling) -> Point3:
    ev = cfg["event"]
    if ev["position"] is not None:
        return as_point(ev["position"])
    if ev["zone"] >= len(tiling):
        raise ValueError(f"event.zone {ev['zone']} out of range ({len(tiling)} zones)")
    return tiling[ev["zone"]].center


# -- world construction ----------------------------------------------------

def _streams(seed: int):
    placement, cred, mac = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(placement), np.random.default_rng(cred),
            np.random.default_rng(mac))


def generate_traces(cfg: ScenarioConfig, tiling: Tiling, rng: np.random.Generator) -> list[MobilityTrace]:
    """Random fleet; positions are drawn for the event instant.

    ``cluster`` vehicles sit uniformly inside the event zone's footprint; the
    remaining ones are spread along the road (the x axis) but kept beyond
    detection distance (plus ``background_clearance``) from the event.
    """
    fl = cfg["fleet"]
    t_ev = float(cfg["event"]["time"])
    t_end = t_ev + float(cfg["hello"]["burst_horizon"])
    r, d = tiling.r, tiling.d
    ev = event_position(cfg, tiling)
    zone = tiling.locate(ev)
    lanes = fl["lanes"]
    lo_v, hi_v = fl["speed"]
    traces = []
    for vid in range(fl["count"]):
        lane = lanes[int(rng.integers(len(lanes)))]
        speed = float(rng.uniform(lo_v, hi_v))
        heading = 1.0 if lane <= 0 else -1.0
        if vid < fl["cluster"] and zone is not None:
            z = tiling[zone]
            p = [float(rng.uniform(z.min_corner[a], z.max_corner[a])) if a in tiling.mode.axes else 0.0
                 for a in range(3)]
        else:
            clear = d + fl["background_clearance"]
            while True:
                x = float(rng.uniform(-r, r))
                p = [x, lane, 0.0]
                if math.dist(p, ev) > clear:
                    break
        traces.append(MobilityTrace.straight(vid, p, (heading * speed, 0.0, 0.0), t_ev, 0.0, t_end))
    return traces


def build_oracle(cfg: ScenarioConfig, traces, rng: np.random.Generator):
    c = cfg["credibility"]
    table = {}
    lo, hi = c["range"]
    for tr in sorted(traces, key=lambda t: id_key(t.vehicle_id)):
        table[tr.vehicle_id] = tr.credibility if tr.credibility is not None else float(rng.uniform(lo, hi))
    src = c["table"]
    if isinstance(src, str):
        table.update(load_credibility_table(cfg.resolve(src)))
    elif isinstance(src, dict):
        table.update({_id(k): float(v) for k, v in src.items()})
    if c["oracle"] == "blockchain":
        return BlockchainMock(table)
    if c["oracle"] == "cloud":
        return CloudMock(table, latency=c["latency"])
    return StaticTable(table)


def _id(raw):
    text = str(raw)
    return int(text) if text.lstrip("-").isdigit() else text


@dataclass
class World:
    """RSU-side state at the event instant plus ground-truth positions."""

    tiling: Tiling
    registry: Registry
    rankings: Rankings
    reporters: dict
    traces: dict
    positions: dict
    event: Point3
    event_zone: Optional[int]
    time: float
    history: list = field(default_factory=list)


def build_world(cfg: ScenarioConfig, seed: int, *, check=None) -> World:
    """Run Hello/ranking/selection rounds from t=0 up to the event time.

    ``check`` (optional) is called as ``check(t, world)`` after every round.
    """
    tiling = tiling_for(cfg)
    r_place, r_cred, _ = _streams(seed)
    if cfg["fleet"]["traces"]:
        traces = load_traces(cfg.resolve(cfg["fleet"]["traces"]))
    else:
        traces = generate_traces(cfg, tiling, r_place)
    oracle = build_oracle(cfg, traces, r_cred)
    params = selection_for(cfg)
    hello = cfg["hello"]
    interval = float(hello["interval"])
    t_ev = float(cfg["event"]["time"])
    ev = event_position(cfg, tiling)
    world = World(tiling, Registry(), Rankings(oracle), {}, {t.vehicle_id: t for t in traces},
                  {}, ev, tiling.locate(ev), t_ev)

    hellos = {}
    for tr in traces:
        for msg in emit_hellos(tr, interval, (max(tr.start, 0.0), min(tr.end, t_ev))):
            hellos.setdefault(round(msg.timestamp / interval), []).append(msg)
    updates = sorted(cfg["credibility"]["updates"], key=lambda u: (u["time"], id_key(_id(u["vehicle"]))))
    ui = 0
    n_ticks = int(math.floor(t_ev / interval + 1e-9))
    for k in range(n_ticks + 1):
        now = tick_time(k, interval)
        while ui < len(updates) and updates[ui]["time"] <= now + 1e-9:
            u = updates[ui]
            vid = _id(u["vehicle"])
            oracle.update(vid, u["value"], now)
            world.rankings.refresh(vid, now, world.registry)
            ui += 1
        deltas = [world.registry.apply(m, tiling)
                  for m in sorted(hellos.get(k, []), key=lambda m: id_key(m.vehicle_id))]
        deltas += world.registry.expire_stale(now, interval, hello["expiry_periods"])
        world.rankings.sync(deltas, now, world.registry)
        phase = now / params.reselect_period
        if abs(phase - round(phase)) < 1e-6:
            world.reporters = sel.reselect_tick(world.rankings, world.registry, params, now)
        if check is not None:
            check(now, world)
    world.time = tick_time(n_ticks, interval) if abs(t_ev - tick_time(n_ticks, interval)) < 1e-9 else t_ev
    for vid, tr in world.traces.items():
        if tr.start - 1e-9 <= t_ev <= tr.end + 1e-9:
            world.positions[vid] = tr.position_at(min(max(t_ev, tr.start), tr.end))
    return world


# -- strategies ------------------------------------------------------------

def detect_event(event, positions: dict, d: float, reporters=None) -> list:
    """Vehicles within ``d`` of the event; narrowed to ``reporters`` when given."""
    ex, ey, ez = event
    found = []
    for vid, (x, y, z) in positions.items():
        if math.sqrt((x - ex) ** 2 + (y - ey) ** 2 + (z - ez) ** 2) <= d:
            found.append(vid)
    if reporters is not None:
        allowed = set(reporters)
        found = [v for v in found if v in allowed]
    return sorted(found, key=id_key)


def choose_senders(strategy: Strategy, world: World, cfg: ScenarioConfig) -> list[tuple]:
    """``(vehicle_id, destination)`` pairs that transmit a report."""
    d = world.tiling.d
    if strategy == Strategy.VTS:
        rs = world.reporters.get(world.event_zone)
        ids = rs.ids if rs is not None else []
        return [(v, RSU) for v in detect_event(world.event, world.positions, d, ids)]
    if strategy == Strategy.BROADCAST_ALL:
        return [(v, BROADCAST) for v in detect_event(world.event, world.positions, d)]
    radius = cfg["nearby_radius"] or d
    return [(v, RSU) for v in detect_event(world.event, world.positions, radius)]


@dataclass
class RunResult:
    strategy: str
    seed: int
    metrics: RunMetrics
    frames: list
    trace: list
    senders: list


def simulate_burst(world: World, cfg: ScenarioConfig, senders: list, seed: int) -> Channel:
    """Report burst on the shared channel; channel time 0 is the event instant."""
    _, _, r_mac = _streams(seed)
    ch = Channel(radio_for(cfg), world.positions, r_mac)
    size = int(cfg["report_size"])
    for vid, dst in senders:
        ch.send(vid, dst, size, 0.0, kind="report")
    hello = cfg["hello"]
    if hello["via_channel"]:
        interval = float(hello["interval"])
        for k in range(int(math.floor(hello["burst_horizon"] / interval + 1e-9)) + 1):
            for vid in sorted(world.positions, key=id_key):
                ch.send(vid, BROADCAST, size, tick_time(k, interval), kind="hello")
    ch.run()
    return ch


def run_point(cfg: ScenarioConfig, seed: int) -> list[RunResult]:
    world = build_world(cfg, seed)
    out = []
    for name in cfg["strategies"]:
        strategy = Strategy(name)
        senders = choose_senders(strategy, world, cfg)
        ch = simulate_burst(world, cfg, senders, seed)
        out.append(RunResult(strategy.value, seed, from_frames(ch.frames), ch.frames, ch.trace, senders))
    return out


# -- sweeps ----------------------------------------------------------------

@dataclass
class PointResult:
    variable: str
    value: float
    runs: list


def _run_one(args):
    cfg, variable, value, seed = args
    point_cfg = cfg if variable is None else cfg.point(variable, value)
    return variable, value, seed, run_point(point_cfg, seed)


def run_scenario(cfg: ScenarioConfig, *, sweep: bool = True, jobs: int = 1) -> list[PointResult]:
    """Every (sweep point, seed, strategy) run, ordered deterministically."""
    plan = cfg["sweep"] if sweep else None
    if plan:
        points = [(plan["variable"], v) for v in plan["values"]]
    else:
        points = [(None, None)]
    tasks = [(cfg, var, val, seed) for var, val in points for seed in cfg.seeds()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_run_one, tasks))
    else:
        done = [_run_one(t) for t in tasks]
    by_point: dict = {}
    for var, val, seed, runs in done:
        by_point.setdefault((var, val), []).extend(runs)
    return [PointResult(var or "none", val if val is not None else 0, by_point[(var, val)])
            for var, val in points]


@dataclass(frozen=True)
class AggregateRow:
    variable: str
    value: float
    strategy: str
    rlr_mean: float
    rlr_std: float
    ard_mean: Optional[float]
    ard_std: Optional[float]
    seeds: int
    r_t: int
    r_r: int


def _std(xs):
    return statistics.pstdev(xs) if len(xs) > 1 else 0.0


def aggregate(points: list[PointResult], strategies) -> list[AggregateRow]:
    rows = []
    for pt in points:
        for s in strategies:
            runs = sorted((r for r in pt.runs if r.strategy == s), key=lambda r: r.seed)
            if not runs:
                continue
            rlrs = [r.metrics.rlr for r in runs]
            ards = [r.metrics.ard for r in runs if r.metrics.ard is not None]
            rows.append(AggregateRow(
                pt.variable, pt.value, s,
                math.fsum(rlrs) / len(rlrs), _std(rlrs),
                math.fsum(ards) / len(ards) if ards else None, _std(ards) if ards else None,
                len(runs), sum(r.metrics.r_t for r in runs), sum(r.metrics.r_r for r in runs),
            ))
    return rows


def series(rows: list[AggregateRow], strategy: str, attr: str) -> list:
    return [getattr(r, attr) for r in rows if r.strategy == strategy]
