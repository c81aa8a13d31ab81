"""Canonical JSON-lines event logs.

Every record serializes through `canonical_json`, so two runs that produce
equal Python values produce byte-equal log lines.  That is the contract the
replay checker and the determinism tests lean on.
"""
from __future__ import annotations

import hashlib
import json
from typing import Iterable


class SchemaError(ValueError):
    """A log or record that does not have the expected shape."""


def canonical_json(obj) -> str:
    """Canonical one-line encoding: sorted keys, tight separators, ASCII.

    NaN/Infinity are rejected rather than silently emitted, since they
    would not round-trip through strict JSON readers.
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True, allow_nan=False)


def digest16(obj) -> str:
    """Short stable digest of a record, for summarizing bulky payloads."""
    return hashlib.sha256(canonical_json(obj).encode("ascii")).hexdigest()[:16]


def write_events(path, events: Iterable[dict]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for e in events:
            fh.write(canonical_json(e))
            fh.write("\n")


def read_events(path) -> list[dict]:
    out: list[dict] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise SchemaError(f"{path}:{lineno}: invalid JSON: {e}") from e
    return out


def validate_events(events: list) -> list[str]:
    """Structural check of a loaded log; returns violations (empty == ok)."""
    issues: list[str] = []
    for i, e in enumerate(events, 1):
        if not isinstance(e, dict):
            issues.append(f"record {i}: not a JSON object")
            continue
        name = e.get("event")
        if not isinstance(name, str) or not name:
            issues.append(f"record {i}: missing or empty 'event'")
        if not isinstance(e.get("session"), int):
            issues.append(f"record {i}: missing integer 'session'")
    return issues
