"""Regenerate the canned 23-vehicle carrier-sense scenario.

23 parked vehicles fill detection zone 1 (the +x neighbour of the RSU's own
zone); the most credible one sits 29.5 m from the RSU. 27 more vehicles
drive along the road well away from the accident.
"""

import math
from pathlib import Path

import numpy as np

from vtsim.fleet import MobilityTrace, dump_traces
from vtsim.geometry import build_tiling

OUT = Path(__file__).resolve().parents[1] / "src" / "vtsim" / "scenarios" / "carrier_sense_fleet.json"
EVENT_TIME = 2.0
END = 2.5


def main(seed: int = 2020) -> None:
    rng = np.random.default_rng(seed)
    tiling = build_tiling(1000.0, 100.0, "disc")
    zone = tiling[1]
    traces = [MobilityTrace.from_waypoints(0, [(0.0, (29.5, 0.0, 0.0)), (END, (29.5, 0.0, 0.0))], 0.99)]
    for vid in range(1, 23):
        x = float(rng.uniform(zone.min_corner.x, zone.max_corner.x))
        y = float(rng.uniform(zone.min_corner.y, zone.max_corner.y))
        cred = round(float(rng.uniform(0.1, 0.9)), 3)
        traces.append(MobilityTrace.from_waypoints(vid, [(0.0, (x, y, 0.0)), (END, (x, y, 0.0))], cred))
    for vid in range(23, 50):
        lane = 1.75 if vid % 2 else -1.75
        heading = -1.0 if lane > 0 else 1.0
        speed = float(rng.uniform(10, 30))
        while True:
            x = float(rng.uniform(-1000, 1000))
            if math.dist((x, lane, 0.0), zone.center) > 150:
                break
        cred = round(float(rng.uniform(0.1, 0.9)), 3)
        traces.append(MobilityTrace.straight(vid, (x, lane, 0.0), (heading * speed, 0, 0), EVENT_TIME, 0.0, END, cred))
    dump_traces(traces, OUT)
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
