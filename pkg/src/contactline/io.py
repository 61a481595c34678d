"""Bit-stable serialization: JSON configs, CSV traces, columnar profiles.

Floats are written with ``repr`` (shortest round-trip decimal), so identical
configs and builds produce byte-identical files.
"""

import dataclasses
import json

import numpy as np

from .diagnostics import TRACE_COLUMNS, Trace
from .errors import ParseError
from .stepper import RunConfig

__all__ = [
    "parse_config",
    "emit_config",
    "write_trace",
    "read_trace",
    "write_columns",
    "write_summary",
]

_CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def parse_config(text):
    """Parse a JSON config document into a validated RunConfig."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed config JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("config document must be a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ParseError(f"unknown config key(s): {', '.join(unknown)}")
    for key, value in raw.items():
        if key in ("scheme", "third_bc"):
            if not isinstance(value, str):
                raise ParseError(f"config key {key!r} must be a string")
        elif key == "n":
            if not isinstance(value, int):
                raise ParseError(f"config key {key!r} must be an integer")
        elif key == "snapshot_times":
            if not isinstance(value, list):
                raise ParseError(f"config key {key!r} must be a list")
        elif key == "gamma0":
            if value is not None and not isinstance(value, (int, float)):
                raise ParseError(f"config key {key!r} must be a number or null")
        elif not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"config key {key!r} must be a number")
    from .errors import ValidationError

    try:
        return RunConfig(**raw)
    except ValidationError as exc:
        raise ParseError(f"invalid config: {exc}") from exc


def emit_config(config):
    d = dataclasses.asdict(config)
    d["snapshot_times"] = list(d["snapshot_times"])
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def _fmt(v):
    return repr(float(v))


def write_trace(trace, path):
    with open(path, "w") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        cols = [trace[c] for c in TRACE_COLUMNS]
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_trace(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty trace file (line 1)")
    header = lines[0].split(",")
    if tuple(header) != TRACE_COLUMNS:
        raise ParseError(f"{path}: bad trace header (line 1)")
    data = {c: [] for c in TRACE_COLUMNS}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(TRACE_COLUMNS):
            raise ParseError(f"{path}: wrong column count (line {lineno})")
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(f"{path}: bad float (line {lineno}): {exc}") from exc
        for c, v in zip(TRACE_COLUMNS, values):
            data[c].append(v)
    if not data["t"]:
        raise ParseError(f"{path}: trace has no records (line 2)")
    from .errors import ValidationError

    try:
        return Trace({c: np.array(v) for c, v in data.items()})
    except ValidationError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_columns(path, names, columns, comments=()):
    """Whitespace-delimited columns with a '#'-prefixed header."""
    columns = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write("# " + " ".join(names) + "\n")
        for row in zip(*columns):
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
