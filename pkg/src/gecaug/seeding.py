"""Deterministic RNG derivation.

Parallel stages never share one RNG. Each unit of work derives its own
stream so results are independent of scheduling order and worker count.
"""

from __future__ import annotations

import hashlib
import random


def stable_seed(*parts: object) -> int:
    """Collapse arbitrary labels into a 64-bit seed, stable across runs."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def slot_rng(base_seed: int, index: int) -> random.Random:
    """RNG for work slot ``index`` derived from a pipeline base seed."""
    return random.Random(base_seed + index)
