import json
import subprocess
import sys
from importlib import resources

import pytest

from vtsim.cli import main

from .oracles import grid_zone_count

SCEN = resources.files("vtsim") / "scenarios"


def test_tile_line(capsys):
    assert main(["tile", "--r", "1000", "--d", "100", "--mode", "line"]) == 0
    assert "zones: 35" in capsys.readouterr().out


def test_tile_list(capsys):
    assert main(["tile", "--r", "50", "--d", "100", "--mode", "ball", "--list"]) == 0
    out = capsys.readouterr().out.splitlines()
    n = grid_zone_count(50, 100, "ball")
    assert n == 19 and f"zones: {n}" in out
    assert out[-n].startswith("0\t") and len(out) == 5 + n


def test_tile_capacity_error(capsys):
    assert main(["tile", "--r", "1000", "--d", "5", "--mode", "ball", "--zone-cap", "100"]) == 2
    assert "zones" in capsys.readouterr().err


def test_run_missing_config(capsys):
    assert main(["run", "missing.cfg"]) != 0
    assert "not found" in capsys.readouterr().err


def test_run_invalid_config(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"radio": {"bandwidth": 0}}))
    assert main(["run", str(p)]) == 2
    assert "radio.bandwidth" in capsys.readouterr().err


def _small(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({
        "fleet": {"count": 15, "cluster": 4}, "radio": {"cs_range": 45},
        "sweep": {"variable": "reporters", "values": [1, 4]}, "seeds": {"count": 3},
    }))
    return p


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_sweep_twice_identical(tmp_path, capsys, fmt):
    cfg = _small(tmp_path)
    outs = []
    for i in range(2):
        d = tmp_path / f"o{i}"
        assert main(["sweep", str(cfg), "--seed", "7", "--out-dir", str(d), "--format", fmt]) == 0
        outs.append((capsys.readouterr().out, (d / f"results.{fmt}").read_bytes(),
                     (d / f"events.{fmt}").read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][1].decode() == outs[0][0]


def test_replay_reproduces_results(tmp_path, capsys):
    cfg = _small(tmp_path)
    assert main(["sweep", str(cfg), "--out-dir", str(tmp_path / "o")]) == 0
    results = capsys.readouterr().out
    assert main(["replay", str(tmp_path / "o" / "events.csv")]) == 0
    assert capsys.readouterr().out == results


def test_replay_rejects_non_log(tmp_path, capsys):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    assert main(["replay", str(p)]) == 2


def test_sweep_without_sweep_section(tmp_path, capsys):
    p = tmp_path / "s.json"
    p.write_text("{}")
    assert main(["sweep", str(p)]) == 2


def test_bundled_scenarios_validate():
    from vtsim import config
    names = sorted(x.name for x in SCEN.iterdir() if x.name.endswith(".json"))
    assert "carrier_sense.json" in names
    for n in names:
        if n != "carrier_sense_fleet.json":
            config.load(SCEN / n)


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "vtsim.cli", "tile", "--mode", "line"],
                         capture_output=True, text=True, check=True)
    assert "zones: 35" in out.stdout
