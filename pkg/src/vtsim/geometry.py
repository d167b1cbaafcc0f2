"""Detection-zone tiling of an RSU's coverage region.

The RSU sits at the origin. Zones are axis-aligned cubes of side ``d/sqrt(3)``
laid on a lattice whose cell ``(0, 0, 0)`` is centred on the RSU; a cube is
part of the tiling when its closest point to the origin (measured inside the
mode's ambient subspace) lies strictly within the coverage radius.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

import numpy as np

from . import kernels

EPS = 1e-9
DEFAULT_ZONE_CAP = 10**6


class GeometryError(ValueError):
    """Invalid tiling parameter."""


class TilingCapacityError(RuntimeError):
    """The requested tiling would exceed the zone-count cap."""


class Mode(str, enum.Enum):
    LINE = "line"
    DISC = "disc"
    BALL = "ball"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise GeometryError(f"unknown tiling mode {value!r}") from None

    @property
    def axes(self) -> tuple[int, ...]:
        return {Mode.LINE: (0,), Mode.DISC: (0, 1), Mode.BALL: (0, 1, 2)}[self]


class Point3(NamedTuple):
    x: float
    y: float
    z: float

    def dist(self, other: Iterable[float]) -> float:
        ox, oy, oz = other
        return math.sqrt((self.x - ox) ** 2 + (self.y - oy) ** 2 + (self.z - oz) ** 2)

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)


def as_point(p) -> Point3:
    x, y, z = (float(c) for c in p)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise GeometryError(f"non-finite point {p!r}")
    return Point3(x, y, z)


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise GeometryError(f"{name} must be positive and finite, got {value!r}")
    return value


def zone_side_length(d: float) -> float:
    """Side of the largest cube whose space diagonal equals ``d``."""
    d = _check_positive("d", d)
    return d / math.sqrt(3.0)


@dataclass(frozen=True)
class DetectionZone:
    id: int
    index: tuple[int, int, int]
    min_corner: Point3
    max_corner: Point3
    side: float

    @property
    def center(self) -> Point3:
        return Point3(*((a + b) / 2 for a, b in zip(self.min_corner, self.max_corner)))

    def contains(self, p, eps: float = EPS) -> bool:
        return all(
            lo - eps <= c <= hi + eps
            for lo, c, hi in zip(self.min_corner, p, self.max_corner)
        )

    def vertices(self) -> list[Point3]:
        lo, hi = self.min_corner, self.max_corner
        return [
            Point3(x, y, z)
            for x in (hi.x, lo.x)
            for y in (hi.y, lo.y)
            for z in (hi.z, lo.z)
        ]


def _min_dist_to_origin(index: tuple[int, ...], side: float) -> float:
    # Closest point of the cell to the origin, per axis.
    acc = 0.0
    for k in index:
        gap = max(0.0, abs(k) * side - side / 2)
        acc += gap * gap
    return math.sqrt(acc)


def _neighbour_offsets(mode: Mode) -> list[tuple[int, int, int]]:
    offsets = []
    for axis in mode.axes:
        for sign in (1, -1):
            off = [0, 0, 0]
            off[axis] = sign
            offsets.append(tuple(off))
    return offsets


def _lower_bound_count(r: float, side: float, mode: Mode) -> float:
    # Cubes must cover the region, so region measure / cell measure bounds the count.
    n = len(mode.axes)
    if n == 1:
        return 2 * r / side
    if n == 2:
        return math.pi * r * r / side**2
    return 4.0 / 3.0 * math.pi * r**3 / side**3


@dataclass(frozen=True)
class Tiling:
    zones: tuple[DetectionZone, ...]
    r: float
    d: float
    mode: Mode
    side: float
    mins: np.ndarray = field(repr=False, compare=False)
    maxs: np.ndarray = field(repr=False, compare=False)
    lut: np.ndarray = field(repr=False, compare=False)
    lut_offset: np.ndarray = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.zones)

    def __getitem__(self, i: int) -> DetectionZone:
        return self.zones[i]

    def locate(self, p) -> Optional[int]:
        zid = int(self.locate_many(np.asarray([p], dtype=np.float64))[0])
        return None if zid < 0 else zid

    def locate_many(self, points) -> np.ndarray:
        """Zone id per row of ``points`` (shape ``(n, 3)``); -1 where uncovered."""
        pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
        return kernels.locate_many(
            pts, self.side, self.lut, self.lut_offset, self.mins, self.maxs, EPS
        )

    def zone_at_index(self, index: tuple[int, int, int]) -> Optional[int]:
        i = np.asarray(index, dtype=np.int64) + self.lut_offset
        if np.any(i < 0) or np.any(i >= self.lut.shape):
            return None
        zid = int(self.lut[tuple(i)])
        return None if zid < 0 else zid

    def summary(self) -> dict:
        return {
            "mode": self.mode.value,
            "r": self.r,
            "d": self.d,
            "side": self.side,
            "zones": len(self.zones),
        }


def build_tiling(r: float, d: float, mode="disc", *, zone_cap: int = DEFAULT_ZONE_CAP) -> Tiling:
    """Grow zones breadth-first from the origin-centred cube.

    Face neighbours are explored in the order +x, -x, +y, -y, +z, -z (restricted
    to the mode's axes), and zone ids follow discovery order.
    """
    r = _check_positive("r", r)
    side = zone_side_length(d)
    mode = Mode.parse(mode)
    if _lower_bound_count(r, side, mode) > zone_cap:
        raise TilingCapacityError(
            f"{mode.value} tiling with r={r}, d={d} needs more than {zone_cap} zones"
        )

    offsets = _neighbour_offsets(mode)
    origin = (0, 0, 0)
    order = [origin]
    seen = {origin}
    queue = deque([origin])
    while queue:
        cur = queue.popleft()
        for off in offsets:
            nxt = (cur[0] + off[0], cur[1] + off[1], cur[2] + off[2])
            if nxt in seen:
                continue
            seen.add(nxt)
            if _min_dist_to_origin(nxt, side) < r - EPS:
                order.append(nxt)
                queue.append(nxt)
                if len(order) > zone_cap:
                    raise TilingCapacityError(
                        f"{mode.value} tiling with r={r}, d={d} exceeds {zone_cap} zones"
                    )

    idx = np.asarray(order, dtype=np.int64)
    half = side / 2
    mins = idx * side - half
    maxs = idx * side + half
    # Unused axes keep the origin layer's bounds.
    zones = tuple(
        DetectionZone(
            id=i,
            index=order[i],
            min_corner=Point3(*mins[i].tolist()),
            max_corner=Point3(*maxs[i].tolist()),
            side=side,
        )
        for i in range(len(order))
    )

    lo = idx.min(axis=0)
    hi = idx.max(axis=0)
    lut = np.full(tuple((hi - lo + 1).tolist()), -1, dtype=np.int64)
    lut[tuple((idx - lo).T)] = np.arange(len(order), dtype=np.int64)

    return Tiling(
        zones=zones,
        r=r,
        d=float(d),
        mode=mode,
        side=side,
        mins=np.ascontiguousarray(mins, dtype=np.float64),
        maxs=np.ascontiguousarray(maxs, dtype=np.float64),
        lut=lut,
        lut_offset=-lo,
    )


def locate(p, tiling: Tiling) -> Optional[int]:
    return tiling.locate(p)
