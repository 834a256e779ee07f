"""Report and trajectory serialization: deterministic JSON and CSV writers.

The JSON report schema is {command, scenario, seed, checks: [...]} with one
record per check carrying the threshold it was judged against, so reports are
self-describing.  CSV trajectories have a header row, comma separators, 17
significant digits and Unix newlines.  Identical inputs produce byte-identical
output.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CheckRecord:
    name: str
    samples: int
    max_residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.threshold)

    def payload(self) -> dict:
        return {
            "name": self.name,
            "samples": int(self.samples),
            "max_residual": float(self.max_residual),
            "threshold": float(self.threshold),
            "pass": self.passed,
        }


def report_document(command: str, scenario: str, seed: int, checks) -> dict:
    return {
        "command": command,
        "scenario": scenario,
        "seed": int(seed),
        "checks": [c.payload() for c in checks],
    }


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def format_value(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_csv(labels, rows) -> str:
    """CSV text: `t,<labels...>` header then one row per sample."""
    lines = ["t," + ",".join(labels)]
    for t, state in rows:
        values = np.asarray(state, dtype=float).reshape(-1)
        lines.append(",".join([format_value(t)] + [format_value(v) for v in values]))
    return "\n".join(lines) + "\n"


def write_text_atomic(path: str, text: str) -> None:
    """Write the file in one rename so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
