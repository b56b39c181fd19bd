"""Driving the simulator from config files, as the command line does.

Equivalent shell session:

    qedsim presets emit rt-berry-null > rt.toml
    qedsim run rt.toml --out out/rt
"""
import json
import tempfile
from pathlib import Path

from qedsim.cli import run
from qedsim.config import PRESETS, parse_config

out = Path(tempfile.mkdtemp())
for name in ("betae-double-well", "rt-berry-null", "conical-berry"):
    cfg = parse_config(PRESETS[name][1])
    code = run(cfg, out / name)
    manifest = json.loads((out / name / "manifest.json").read_text())
    print(f"{name}: exit {code}")
    print("  " + (out / name / "results.csv").read_text().splitlines()[0])
    for key, value in manifest["results"].items():
        if not isinstance(value, (list, dict)):
            print(f"  {key} = {value}")
print(f"outputs in {out}")
