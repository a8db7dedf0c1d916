"""Run manifests and deterministic CSV output.

Every command writes one CSV of results plus a JSON manifest holding the
full parameter set, master seed, tool version, wall clock, output paths,
and a schema describing every CSV column.  Floats are serialized with
``repr`` (shortest round-trip), so a rerun with the same command, flags and
seed reproduces the CSV byte for byte regardless of thread count.
"""

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

TOOL_VERSION = "0.1.0"


@dataclass
class RunManifest:
    experiment: str
    parameters: dict
    seed: int
    version: str = TOOL_VERSION
    wall_clock_s: float = 0.0
    outputs: list = field(default_factory=list)
    schema: dict = field(default_factory=dict)

    def write(self, path):
        path = Path(path)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, columns, rows):
    """Write rows (dicts) in the given column order; deterministic bytes."""
    path = Path(path)
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    return path


class StopWatch:
    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self._start
        return False
