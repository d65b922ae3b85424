"""Deterministic, order-independent random streams."""

from __future__ import annotations

import hashlib

import numpy as np


def stream(seed: int, *key: object) -> np.random.Generator:
    """Independent generator for the given (seed, key) combination.

    Streams derived from the same seed but different keys are statistically
    independent, so callers may process records in any order, or on any
    number of threads, without changing the outcome. Keys are hashed with
    SHA-256, never Python's salted ``hash``, so streams are stable across
    interpreter runs and platforms.
    """
    digest = hashlib.sha256(repr(key).encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, *words]))
