"""Command-line entry point: ``vtsim {tile,run,sweep,replay}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import config as cfgmod
from . import eventlog, harness
from .geometry import GeometryError, TilingCapacityError, build_tiling

log = logging.getLogger("vtsim")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="base seed (overrides seeds.base)")
    p.add_argument("--seeds", type=int, help="number of seeds (overrides seeds.count)")
    p.add_argument("--out-dir", type=Path, help="write results and frame log here")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vtsim", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tile", help="build a detection-zone tiling and print its stats")
    t.add_argument("--r", type=float, default=1000.0, help="RSU coverage radius (m)")
    t.add_argument("--d", type=float, default=100.0, help="accurate detection distance (m)")
    t.add_argument("--mode", default="disc", choices=("line", "disc", "ball"))
    t.add_argument("--zone-cap", type=int, default=10**6)
    t.add_argument("--list", action="store_true", help="also print every zone's bounds")

    r = sub.add_parser("run", help="run a scenario at its base parameters")
    r.add_argument("config", type=Path)
    _add_output_flags(r)

    s = sub.add_parser("sweep", help="run every point of the scenario's sweep")
    s.add_argument("config", type=Path)
    _add_output_flags(s)

    p = sub.add_parser("replay", help="recompute metrics from a frame log")
    p.add_argument("eventlog", type=Path)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    return ap


def _cmd_tile(args) -> int:
    tiling = build_tiling(args.r, args.d, args.mode, zone_cap=args.zone_cap)
    info = tiling.summary()
    print(f"mode: {info['mode']}")
    print(f"r: {info['r']:g} m")
    print(f"d: {info['d']:g} m")
    print(f"side: {info['side']:.9f} m")
    print(f"zones: {info['zones']}")
    if args.list:
        for z in tiling.zones:
            lo = ",".join(f"{c:.6f}" for c in z.min_corner)
            hi = ",".join(f"{c:.6f}" for c in z.max_corner)
            print(f"{z.id}\t{lo}\t{hi}")
    return 0


def _load(args) -> cfgmod.ScenarioConfig:
    cfg = cfgmod.load(args.config)
    seeds = dict(cfg["seeds"])
    if args.seed is not None:
        seeds["base"] = args.seed
    if args.seeds is not None:
        seeds["count"] = args.seeds
    return cfg.with_overrides(seeds=seeds)


def _emit(points, cfg, args) -> None:
    rows = harness.aggregate(points, cfg["strategies"])
    table = eventlog.format_results(rows, args.format)
    if args.out_dir is not None:
        ext = args.format
        eventlog.write_text(args.out_dir / f"results.{ext}", table)
        eventlog.write_text(args.out_dir / f"events.{ext}", eventlog.format_events(points, args.format))
        log.info("wrote %s", args.out_dir)
    sys.stdout.write(table)


def _cmd_run(args, sweep: bool) -> int:
    cfg = _load(args)
    if sweep and not cfg["sweep"]:
        raise cfgmod.ConfigError(f"{args.config}: no sweep section")
    points = harness.run_scenario(cfg, sweep=sweep, jobs=args.jobs)
    _emit(points, cfg, args)
    return 0


def _cmd_replay(args) -> int:
    runs = eventlog.replay(args.eventlog)
    points: dict = {}
    strategies: list = []
    for (var, val, strategy, seed), m in runs.items():
        pt = points.setdefault((var, val), harness.PointResult(var, val, []))
        pt.runs.append(harness.RunResult(strategy, seed, m, [], [], []))
        if strategy not in strategies:
            strategies.append(strategy)
    rows = harness.aggregate(list(points.values()), strategies)
    sys.stdout.write(eventlog.format_results(rows, args.format))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "tile":
            return _cmd_tile(args)
        if args.command == "run":
            return _cmd_run(args, sweep=False)
        if args.command == "sweep":
            return _cmd_run(args, sweep=True)
        return _cmd_replay(args)
    except BrokenPipeError:
        # Reader went away (e.g. piped into head); stay quiet.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except FileNotFoundError as exc:
        print(f"vtsim: file not found: {exc.filename or exc}", file=sys.stderr)
    except (cfgmod.ConfigError, GeometryError, TilingCapacityError, ValueError, KeyError, OSError) as exc:
        print(f"vtsim: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
