"""Deterministic randomness helpers.

Every random quantity in this package is driven by an explicit 64-bit seed.
Streams are built on numpy's counter-based Philox engine keyed by
``(seed, path)``: the same pair yields a bit-identical stream on every
platform (for a fixed numpy release), and distinct paths give independent
streams, so parallel scheduling cannot change results.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def hash_path(*parts: int) -> int:
    """Fold integers into a single 64-bit value (FNV-1a over their bytes)."""
    h = _FNV_OFFSET
    for part in parts:
        for byte in int(part & _MASK64).to_bytes(8, "little"):
            h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def stream(seed: int, *path: int) -> np.random.Generator:
    """Philox generator for ``(seed, path)``; same arguments, same bits."""
    key = np.array([seed & _MASK64, hash_path(*path)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
