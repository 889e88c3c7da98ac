"""Helpers shared by the reference scripts."""

import json
import sys
from pathlib import Path

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "golden"


def out_dir():
    # Scripts write into tests/golden unless a directory is given.
    return Path(sys.argv[1]) if len(sys.argv) > 1 else GOLDEN_DIR


def write_json(path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def fmt(x):
    return repr(float(x))
