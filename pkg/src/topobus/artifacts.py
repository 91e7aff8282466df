"""Byte-stable CSV/JSON artifact writers for the experiment runner.

CSV output follows RFC 4180: comma separation, CRLF row endings, one
header row, quoting only where required.  Floats are rendered with
repr(), the shortest round-trip form, so identical inputs give
identical bytes; nothing time- or locale-dependent goes into a CSV.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = ["Check", "format_cell", "write_csv", "write_manifest",
           "write_verdict"]


@dataclass(frozen=True)
class Check:
    """One acceptance line of an experiment verdict."""

    name: str
    passed: bool
    detail: str = ""


def format_cell(value) -> str:
    # numpy scalars subclass float/int but repr as np.float64(...); the
    # builtin casts keep the shortest round-trip form for both.
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, int):
        return str(int(value))
    return str(value)


def _quote(cell: str) -> str:
    if any(c in cell for c in (',', '"', '\r', '\n')):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def write_csv(path: Path, header: Sequence[str],
              rows: Iterable[Sequence]) -> None:
    lines = [",".join(_quote(h) for h in header)]
    for row in rows:
        lines.append(",".join(_quote(format_cell(v)) for v in row))
    data = "\r\n".join(lines) + "\r\n"
    Path(path).write_bytes(data.encode("utf-8"))


def write_manifest(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True,
                                     default=_json_fallback) + "\n")


def _json_fallback(obj):
    import numpy as np

    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def write_verdict(path: Path, checks: Sequence[Check]) -> bool:
    ok = all(c.passed for c in checks)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}"
             + (f"  ({c.detail})" if c.detail else "")
             for c in checks]
    lines.append(f"VERDICT: {'PASS' if ok else 'FAIL'}")
    Path(path).write_text("\n".join(lines) + "\n")
    return ok
