"""CSV output with a '#'-prefixed metadata header block, and run manifests.

All numbers are written with repr-level precision so reruns of a
deterministic computation reproduce files bit-for-bit.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from . import __version__


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, columns: dict, metadata: dict | None = None) -> None:
    """Write named columns with an optional metadata header."""
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[k]).ravel() for k in names]
    length = arrays[0].size
    if any(a.size != length for a in arrays):
        raise ValueError("all columns must have equal length")
    lines = []
    for key, value in (metadata or {}).items():
        lines.append(f"# {key} = {_fmt(value)}")
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Inverse of write_csv: (metadata dict of strings, dict of float arrays)."""
    meta = {}
    rows = []
    names = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif names is None:
            names = line.split(",")
        elif line:
            rows.append(line.split(","))
    data = {}
    for i, name in enumerate(names or []):
        column = [r[i] for r in rows]
        try:
            data[name] = np.array([float(v) for v in column])
        except ValueError:
            data[name] = np.array(column)
    return meta, data


def write_manifest(path, subcommand: str, parameters: dict, outputs: list,
                   tolerances: dict | None = None, seed=None,
                   duration: float | None = None, inputs: list | None = None) -> None:
    """Record everything needed to reproduce a run bit-for-bit."""
    manifest = {
        "subcommand": subcommand,
        "parameters": parameters,
        "inputs": inputs or [],
        "outputs": [str(o) for o in outputs],
        "tolerances": tolerances or {},
        "seed": seed,
        "tool_version": __version__,
        "wall_seconds": duration,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
