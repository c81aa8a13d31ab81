"""Deterministic seed derivation and keyed random draws.

Every random decision in the framework flows from a 64-bit master seed
through SHA-256, never from global RNG state or wall clock, so runs are
reproducible bit-for-bit across platforms and worker counts.
"""
from __future__ import annotations

import hashlib
import random


def _canon(parts: tuple) -> bytes:
    return repr(parts).encode("utf-8")


def h64(*parts) -> int:
    """Stable 64-bit hash of a tuple of ints/strings."""
    return int.from_bytes(hashlib.sha256(_canon(parts)).digest()[:8], "big")


def substream(*parts) -> random.Random:
    """Independent RNG stream named by its parts."""
    return random.Random(h64(*parts))


class KeyedStream:
    """Stateless uniform draws addressed by key, not by draw order.

    Keying draws to (purpose, capture, object) tuples gives common random
    numbers across parameter sweeps: changing one probability never shifts
    the randomness consumed by unrelated decisions.
    """

    def __init__(self, *salt_parts):
        self._salt = hashlib.sha256(_canon(salt_parts)).digest()

    def u01(self, *key) -> float:
        h = hashlib.sha256(self._salt + _canon(key)).digest()
        return int.from_bytes(h[:8], "big") / 2.0 ** 64

    def pick(self, n: int, *key) -> int:
        h = hashlib.sha256(self._salt + _canon(key) + b"#pick").digest()
        return int.from_bytes(h[:8], "big") % n
