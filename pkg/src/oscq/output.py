"""Deterministic machine-readable output: CSV and JSON with full-precision
floats (17 significant digits), byte-stable across identical runs."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (exact round trip)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """Serialize nested dict/list/scalar structures to JSON.

    Hand-rolled so floats are emitted via :func:`fmt17` (the stdlib
    encoder pins floats to repr).  Dict insertion order is preserved;
    non-finite floats become null.
    """
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return "null"
        return fmt17(x)
    if isinstance(obj, str):
        escaped = (
            obj.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\t", "\\t")
        )
        return f'"{escaped}"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{key}": {to_json(val, indent + 1)}' for key, val in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{to_json(val, indent + 1)}" for val in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def complex_entry(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag, "modulus": abs(z)}


def write_csv(path, header: list[str], rows) -> None:
    """Write rows of floats under a comma-separated header."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt17(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def waveform_rows(times: np.ndarray, states: np.ndarray):
    for t, x in zip(times, states):
        yield [t, *x]


def write_waveform_csv(path, times, states, state_names) -> None:
    write_csv(path, ["t", *state_names], waveform_rows(times, states))
