"""JSON/CSV report writers and plot-script emission."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1

REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "config", "rows", "verdict", "constants"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"type": "string"},
        "config": {"type": "object"},
        "rows": {"type": "array"},
        "verdict": {"enum": ["PASS", "FAIL"]},
        "constants": {"type": "object"},
    },
}


def jsonable(obj):
    """Convert numpy scalars/arrays, complex numbers and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x + 0.0  # folds -0.0 into 0.0
    return obj


def make_report(command: str, config: dict, rows: list, verdict: str, constants: dict | None = None) -> dict:
    if verdict not in ("PASS", "FAIL"):
        raise ValueError(f"verdict must be PASS or FAIL, got {verdict!r}")
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": jsonable(config),
        "rows": jsonable(rows),
        "verdict": verdict,
        "constants": jsonable(constants or {}),
    }


def dumps_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def fmt_number(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_number(x) for x in row))
    return "\n".join(lines) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


PLOT_TEMPLATE = '''\
"""Plot {title} from {data}. Requires matplotlib; run with python3."""
import csv
import os
import sys

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, {data!r})
with open(path, newline="") as fh:
    rows = list(csv.DictReader(fh))
x = [float(r[{x!r}]) for r in rows]
for col in {ys!r}:
    y = [float(r[col]) for r in rows]
    pts = [(a, b) for a, b in zip(x, y) if a > 0 and b > 0]
    if pts:
        plt.loglog(*zip(*pts), marker="o", label=col)
plt.xlabel({x!r})
plt.legend()
plt.title({title!r})
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
'''


def plot_script(data_path: str, x: str, ys: Sequence[str], title: str) -> str:
    """A standalone log-log plotting script; relative data paths resolve next to the script."""
    return PLOT_TEMPLATE.format(data=str(data_path), x=x, ys=list(ys), title=title)
