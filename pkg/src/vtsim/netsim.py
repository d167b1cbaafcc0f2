"""Discrete-event CSMA channel shared by the vehicles and the RSU.

Simplified CSMA/CA: sense, wait DIFS, transmit; if the medium is busy, wait
until it clears, then DIFS plus a uniform backoff of ``[0, cw_min - 1]``
slots and sense again. No RTS/CTS, no ACKs, no retransmissions. Sensing is
instantaneous (propagation delay ignored), so two nodes that can hear each
other never overlap: same-instant starts are serialised by event order.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Optional

import numpy as np

from . import kernels
from .fleet import id_key

RSU = "RSU"
BROADCAST = "*"


class Outcome(str, enum.Enum):
    DELIVERED = "DELIVERED"
    COLLIDED = "COLLIDED"
    OUT_OF_RANGE = "OUT_OF_RANGE"
    SENDER_UNSENSED = "SENDER_UNSENSED"


class EventKind(enum.IntEnum):
    # Value doubles as same-instant priority: a channel frees before anyone grabs it.
    TX_END = 0
    TX_START = 1
    BACKOFF_EXPIRE = 2
    TX_ATTEMPT = 3


@dataclass(frozen=True)
class RadioConfig:
    bandwidth: float = 1e6
    tx_range: float = 250.0
    cs_range: float = 100.0
    slot_time: float = 20e-6
    difs: float = 50e-6
    cw_min: int = 32
    rsu_tx_range: float = 1000.0

    def __post_init__(self):
        for name in ("bandwidth", "tx_range", "cs_range", "slot_time", "difs", "cw_min", "rsu_tx_range"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"radio.{name} must be positive, got {value!r}")
        if int(self.cw_min) != self.cw_min:
            raise ValueError("radio.cw_min must be an integer number of slots")


def airtime(size: float, bandwidth: float) -> float:
    """Seconds on air for ``size`` bytes."""
    if size < 0 or not bandwidth > 0:
        raise ValueError("size must be >= 0 and bandwidth > 0")
    return size * 8 / bandwidth


@dataclass(eq=False)
class Frame:
    fid: int
    src: Hashable
    dst: Hashable
    size: int
    enqueue_time: float
    kind: str = "report"
    receivers: tuple = ()
    tx_start: Optional[float] = None
    tx_end: Optional[float] = None
    outcomes: dict = field(default_factory=dict)
    wait_from: float = 0.0
    deferrals: int = 0


@dataclass(order=True)
class SimEvent:
    time: float
    kind: EventKind
    node: int
    seq: int
    frame: Frame = field(compare=False)


class Channel:
    """One simulation instance: static node positions, one shared medium."""

    def __init__(self, radio: RadioConfig, positions: dict, rng: np.random.Generator,
                 rsu_position=(0.0, 0.0, 0.0)):
        if RSU in positions:
            raise ValueError(f"{RSU!r} is reserved for the road-side unit")
        self.radio = radio
        self.rng = rng
        self.ids = sorted(positions, key=id_key) + [RSU]
        self.index = {nid: i for i, nid in enumerate(self.ids)}
        pos = [tuple(map(float, positions[nid])) for nid in self.ids[:-1]]
        pos.append(tuple(map(float, rsu_position)))
        self.positions = np.array(pos, dtype=np.float64).reshape(-1, 3)
        self.dist = kernels.distance_matrix(self.positions)
        self.senses = self.dist <= radio.cs_range
        self.frames: list[Frame] = []
        self.started: list[Frame] = []
        self.trace: list[tuple] = []
        self._queue: list[SimEvent] = []
        self._seq = itertools.count()
        self._fid = itertools.count()
        self._backlog: dict[int, list[Frame]] = {}
        self._busy_nodes: set[int] = set()

    # -- geometry helpers ---------------------------------------------------

    def distance(self, a, b) -> float:
        return float(self.dist[self.index[a], self.index[b]])

    def _tx_range(self, node) -> float:
        return self.radio.rsu_tx_range if node == RSU else self.radio.tx_range

    # -- scheduling ---------------------------------------------------------

    def _push(self, t: float, kind: EventKind, frame: Frame) -> None:
        ev = SimEvent(t, kind, self.index[frame.src], next(self._seq), frame)
        heapq.heappush(self._queue, ev)

    def send(self, src, dst, size: int, t: float, kind: str = "report") -> Frame:
        """Enqueue a frame at ``src`` at time ``t``."""
        if src not in self.index:
            raise KeyError(f"unknown node {src!r}")
        if dst == BROADCAST:
            receivers = tuple(
                nid for nid in self.ids[:-1]
                if nid != src and self.distance(src, nid) <= self._tx_range(src)
            )
            receivers = receivers + ((RSU,) if src != RSU else ())
        else:
            if dst not in self.index:
                raise KeyError(f"unknown destination {dst!r}")
            receivers = (dst,)
        frame = Frame(next(self._fid), src, dst, int(size), float(t), kind, receivers)
        self.frames.append(frame)
        i = self.index[src]
        self._backlog.setdefault(i, []).append(frame)
        if i not in self._busy_nodes:
            self._busy_nodes.add(i)
            self._push(t, EventKind.TX_ATTEMPT, frame)
        return frame

    # -- sensing ------------------------------------------------------------

    def _sensed(self, node: int):
        row = self.senses[node]
        for f in self.started:
            j = self.index[f.src]
            if j != node and row[j]:
                yield f

    def channel_busy(self, node, t: float) -> bool:
        """True iff another node within carrier-sense range is on air at ``t``."""
        i = self.index[node]
        return any(f.tx_start <= t < f.tx_end for f in self._sensed(i))

    def _idle_since(self, node: int, since: float, now: float) -> bool:
        return not any(f.tx_start <= now and f.tx_end > since for f in self._sensed(node))

    def _backoff(self, frame: Frame, now: float) -> None:
        node = self.index[frame.src]
        idle_at = now
        for f in self._sensed(node):
            if f.tx_start <= now:
                idle_at = max(idle_at, f.tx_end)
        slots = int(self.rng.integers(0, int(self.radio.cw_min)))
        frame.wait_from = idle_at
        frame.deferrals += 1
        self._push(idle_at + self.radio.difs + slots * self.radio.slot_time,
                   EventKind.BACKOFF_EXPIRE, frame)

    def _start(self, frame: Frame, now: float) -> None:
        frame.tx_start = now
        frame.tx_end = now + airtime(frame.size, self.radio.bandwidth)
        self.started.append(frame)
        self._push(frame.tx_end, EventKind.TX_END, frame)

    # -- reception ----------------------------------------------------------

    def resolve_reception(self, frame: Frame, receiver) -> Outcome:
        s, r = self.index[frame.src], self.index[receiver]
        d = self.dist[s, r]
        if d > self._tx_range(frame.src):
            return Outcome.OUT_OF_RANGE
        if receiver == RSU and d > self.radio.cs_range:
            return Outcome.SENDER_UNSENSED
        for g in self.started:
            if g is frame:
                continue
            if self.dist[self.index[g.src], r] <= self.radio.cs_range and \
                    g.tx_start < frame.tx_end and g.tx_end > frame.tx_start:
                return Outcome.COLLIDED
        return Outcome.DELIVERED

    # -- main loop ----------------------------------------------------------

    def step(self) -> SimEvent:
        ev = heapq.heappop(self._queue)
        t, frame, node = ev.time, ev.frame, ev.node
        self.trace.append((t, ev.kind.name, frame.src, frame.fid))
        if ev.kind == EventKind.TX_ATTEMPT:
            if self.channel_busy(frame.src, t):
                self._backoff(frame, t)
            else:
                frame.wait_from = t
                self._push(t + self.radio.difs, EventKind.TX_START, frame)
        elif ev.kind in (EventKind.TX_START, EventKind.BACKOFF_EXPIRE):
            if self._idle_since(node, frame.wait_from, t):
                self._start(frame, t)
            else:
                self._backoff(frame, t)
        elif ev.kind == EventKind.TX_END:
            for rcv in frame.receivers:
                frame.outcomes[rcv] = self.resolve_reception(frame, rcv)
            backlog = self._backlog[node]
            backlog.pop(0)
            if backlog:
                nxt = backlog[0]
                self._push(max(t, nxt.enqueue_time), EventKind.TX_ATTEMPT, nxt)
            else:
                self._busy_nodes.discard(node)
        return ev

    def run(self, until: float = math.inf) -> list[Frame]:
        while self._queue and self._queue[0].time <= until:
            self.step()
        return self.frames


def try_send(channel: Channel, node, frame_size: int, t: float, dst=RSU) -> Frame:
    return channel.send(node, dst, frame_size, t)


def hidden_collisions(channel: Channel, receiver=RSU) -> int:
    """Frames to ``receiver`` overlapped by a transmission their sender could not sense.

    Counts only interferers whose signal reaches the receiver (within their
    transmission range), independently of how the outcome was classified.
    """
    r = channel.index[receiver]
    count = 0
    for f in channel.started:
        if receiver not in f.receivers:
            continue
        s = channel.index[f.src]
        for g in channel.started:
            if g is f:
                continue
            j = channel.index[g.src]
            if not channel.senses[s, j] and channel.dist[j, r] <= channel._tx_range(g.src) \
                    and g.tx_start < f.tx_end and g.tx_end > f.tx_start:
                count += 1
                break
    return count
