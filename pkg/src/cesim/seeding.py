"""Deterministic seed derivation.

All randomness in the toolkit flows from a single root seed. Stage seeds are
derived by hashing ``root_seed:label`` so adding or removing one stage never
perturbs the streams of the others.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(root_seed: int, label: str) -> int:
    """64-bit stage seed from a root seed and a stage label."""
    digest = hashlib.sha256(f"{root_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int) -> np.random.Generator:
    # Philox is counter-based: identical streams on every platform.
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))
