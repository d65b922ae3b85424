"""Token predictions to per-character probability tracks.

A model reports inside-drug probabilities for tokens it places at character
offsets. Every character covered by a token inherits that token's
probability, characters covered by several tokens take the maximum, and
characters in no token stay at zero. The result is run-length encoded as
maximal stretches of equal nonzero probability, which is exactly the
prediction-file record format: {"tweet_id", "length", "runs": [[start, end,
prob], ...]}.
"""

from __future__ import annotations

import json
import math
from typing import NamedTuple


class OffsetError(ValueError):
    """A token's character offsets do not fit the text they describe."""


class TokenPrediction(NamedTuple):
    start: int
    end: int
    prob: float


def char_probs(length: int, tokens: list[TokenPrediction]) -> list[float]:
    """Broadcast token probabilities onto characters, max on overlap."""
    if length < 0:
        raise ValueError(f"text length must be >= 0, got {length}")
    probs = [0.0] * length
    for token in tokens:
        start, end, prob = token
        if not isinstance(start, int) or not isinstance(end, int):
            raise OffsetError(f"token offsets must be integers, got ({start!r}, {end!r})")
        if start < 0 or end > length or start >= end:
            raise OffsetError(
                f"token offsets [{start}, {end}) do not fit text of length {length}"
            )
        if not isinstance(prob, (int, float)) or isinstance(prob, bool) or not math.isfinite(prob):
            raise ValueError(f"token probability must be a finite number, got {prob!r}")
        if not 0.0 <= prob <= 1.0:
            raise ValueError(f"token probability must be in [0, 1], got {prob}")
        for i in range(start, end):
            if prob > probs[i]:
                probs[i] = float(prob)
    return probs


def runs_from_probs(probs: list[float]) -> list[tuple[int, int, float]]:
    """Maximal constant-probability stretches; zero stretches are elided."""
    runs: list[tuple[int, int, float]] = []
    start = 0
    for i in range(1, len(probs) + 1):
        if i == len(probs) or probs[i] != probs[start]:
            if probs[start] > 0.0:
                runs.append((start, i, probs[start]))
            start = i
    return runs


def track_record(tweet_id: str, text: str, tokens: list[TokenPrediction]) -> dict:
    try:
        probs = char_probs(len(text), tokens)
    except OffsetError as exc:
        raise OffsetError(f"tweet {tweet_id!r}: {exc}") from None
    return {
        "tweet_id": tweet_id,
        "length": len(text),
        "runs": [[s, e, p] for s, e, p in runs_from_probs(probs)],
    }


def serialize_record(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))
