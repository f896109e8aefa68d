"""Deterministic seed splitting.

Every random choice in the package flows from one master seed through
``derive``: child seeds are SHA-256 digests of the master seed plus context
labels, so runs are reproducible across processes and platforms and
independent of worker count.
"""

from __future__ import annotations

import hashlib
import random

_MASK63 = (1 << 63) - 1


def derive(seed: int, *parts) -> int:
    """Collapse a master seed plus context labels into a 63-bit child seed."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "big") & _MASK63


def child_rng(seed: int, *parts) -> random.Random:
    """A ``random.Random`` seeded from ``derive(seed, *parts)``."""
    return random.Random(derive(seed, *parts))
