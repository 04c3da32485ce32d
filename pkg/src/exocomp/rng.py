"""Deterministic random-number plumbing.

One explicit 64-bit root seed is the only source of randomness in the
package. Independent streams are derived by hashing the root seed together
with a label path (strings or ints) and keying a counter-based Philox
generator with the digest. The same (seed, path) pair always yields the
same stream on every platform, and distinct paths give statistically
independent streams, so experiments can split freely without coordination.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


def spawn(seed: int, *path: str | int) -> np.random.Generator:
    """Derive an independent generator from ``seed`` and a label path."""
    if not isinstance(seed, int):
        raise TypeError(f"seed must be an int, got {type(seed).__name__}")
    h = hashlib.sha256()
    h.update(struct.pack("<Q", seed & _MASK64))
    for part in path:
        if not isinstance(part, (str, int)):
            raise TypeError(f"path labels must be str or int, got {type(part).__name__}")
        h.update(repr(part).encode("utf8"))
        h.update(b"\x00")
    digest = h.digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
