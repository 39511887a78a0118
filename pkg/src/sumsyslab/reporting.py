"""Deterministic report emission: CSV tables with config-echo comments and
JSON verdicts with stable key order.

Floats are rendered with repr, the shortest decimal that round-trips (at
most 17 significant digits), so identical runs produce identical bytes.
Timestamps only ever go into the separate run-metadata file.
"""

from __future__ import annotations

import csv
import json
import os
from datetime import datetime, timezone
from pathlib import Path


def fmt(value) -> str:
    if isinstance(value, (bool,)) or type(value).__name__ == "bool_":
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain float repr even for numpy scalars
    return str(value)


def config_echo_lines(config: dict) -> list[str]:
    return [f"# {key} = {fmt(config[key])}" for key in sorted(config)]


def write_csv(path, columns: list[str], rows: list[list], config: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in config_echo_lines(config):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_metadata(out_dir, config: dict, version: str) -> None:
    write_json(Path(out_dir) / "meta.json", {
        "tool_version": version,
        "config": {k: config[k] for k in sorted(config)},
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
    })


def parse_config(path) -> dict:
    """key = value lines; values are parsed as JSON with a string fallback."""
    out: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            try:
                out[key] = json.loads(value)
            except json.JSONDecodeError:
                out[key] = value
    return out


def thread_count() -> int:
    raw = os.environ.get("SUMSYSLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
