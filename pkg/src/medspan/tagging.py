"""Character-level probability tracks and the gazetteer tagger.

A CharProbTrack stores, for one tweet and one model, the probability that
each character sits inside a drug mention. Runs are kept run-length
encoded; characters not covered by any run have probability zero. The
GazetteerTagger is a deterministic stand-in for a trained sequence model:
it matches lexicon entries exactly (case-insensitive) and, for longer
entries, within edit distance one.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .corpus import Dataset, Tweet
from .exceptions import FormatError
from .lexicon import Lexicon
from .validation import check_probability, ensure_dataset


@dataclass(frozen=True)
class CharProbTrack:
    """Per-character inside-a-mention probabilities for one (tweet, model).

    Runs are (start, end, prob) with half-open bounds, sorted, disjoint and
    in-bounds; zero-probability runs are never stored.
    """

    tweet_id: str
    length: int
    runs: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self) -> None:
        if not self.tweet_id:
            raise ValueError("track tweet_id must be non-empty")
        if self.length < 0:
            raise ValueError(f"track length must be non-negative, got {self.length}")
        object.__setattr__(
            self, "runs", tuple((int(s), int(e), float(p)) for s, e, p in self.runs)
        )
        prev_end = 0
        for start, end, prob in self.runs:
            if start < prev_end:
                raise ValueError(f"runs overlap or are unsorted near [{start}, {end})")
            if end <= start or end > self.length:
                raise ValueError(
                    f"run [{start}, {end}) out of bounds for track of length {self.length}"
                )
            if not 0.0 < prob <= 1.0:
                raise ValueError(
                    f"run probability must be in (0, 1], got {prob}; zero runs are elided"
                )
            prev_end = end

    def dense(self) -> np.ndarray:
        """Expand to one float per character."""
        probs = np.zeros(self.length)
        for start, end, prob in self.runs:
            probs[start:end] = prob
        return probs

    @classmethod
    def from_dense(cls, tweet_id: str, probs: np.ndarray | Iterable[float]) -> CharProbTrack:
        """Run-length encode a per-character probability array, eliding zeros."""
        array = np.asarray(probs, dtype=float)
        if array.ndim != 1:
            raise ValueError("probabilities must be one-dimensional")
        if array.size == 0:
            return cls(tweet_id, 0, ())
        runs = []
        boundaries = [0, *(np.flatnonzero(np.diff(array)) + 1), array.size]
        for start, end in zip(boundaries, boundaries[1:]):
            value = float(array[start])
            if value != 0.0:
                runs.append((int(start), int(end), value))
        return cls(tweet_id, int(array.size), tuple(runs))


# ---------------------------------------------------------------------------
# Gazetteer matching


def _word_boundaries(text: str) -> list[int]:
    # A boundary sits wherever the alphanumeric-ness changes, plus both ends.
    boundaries = [0]
    for i in range(1, len(text)):
        if text[i - 1].isalnum() != text[i].isalnum():
            boundaries.append(i)
    if len(text) > 0:
        boundaries.append(len(text))
    return boundaries


def _within_one_edit(a: str, b: str) -> bool:
    la, lb = len(a), len(b)
    if abs(la - lb) > 1:
        return False
    if la == lb:
        return sum(1 for x, y in zip(a, b) if x != y) <= 1
    if la > lb:
        a, b, la, lb = b, a, lb, la
    i = j = 0
    skipped = False
    while i < la and j < lb:
        if a[i] == b[j]:
            i += 1
            j += 1
        elif skipped:
            return False
        else:
            skipped = True
            j += 1
    return True


def tag(
    tweet: Tweet,
    lexicon: Lexicon,
    *,
    exact_prob: float = 0.9,
    fuzzy_prob: float = 0.6,
    max_edit_distance: int = 1,
) -> CharProbTrack:
    """Tag one tweet against a lexicon.

    Word-boundary-aligned substrings equal to an entry (case-insensitive)
    get exact_prob; substrings within edit distance one of an entry of
    length >= 5 get fuzzy_prob when max_edit_distance is 1. Overlapping
    matches resolve per character by the maximum probability. An empty
    lexicon matches nothing.
    """
    check_probability(exact_prob, "exact_prob")
    check_probability(fuzzy_prob, "fuzzy_prob")
    if fuzzy_prob > exact_prob:
        raise ValueError(
            f"fuzzy_prob {fuzzy_prob} must not exceed exact_prob {exact_prob}"
        )
    if max_edit_distance not in (0, 1):
        raise ValueError(f"max_edit_distance must be 0 or 1, got {max_edit_distance}")
    if len(lexicon) == 0:
        return CharProbTrack(tweet.id, len(tweet.text))
    text = tweet.text
    exact_entries = {entry.casefold() for entry in lexicon.entries}
    fuzzy_entries = sorted(
        {entry.casefold() for entry in lexicon.entries if len(entry) >= 5}
    )
    lengths = {len(e) for e in exact_entries}
    shortest = min(lengths) - max_edit_distance
    longest = max(lengths) + max_edit_distance
    probs = np.zeros(len(text))
    boundaries = _word_boundaries(text)
    for bi, start in enumerate(boundaries):
        # Windows span whole words: they start and end on alphanumerics.
        # Otherwise " tylenol" sits one edit from "tylenol" and every exact
        # match would grow a spurious fuzzy halo over its surrounding spaces.
        if start >= len(text) or not text[start].isalnum():
            continue
        for end in boundaries[bi + 1 :]:
            if end - start > longest:
                break
            if end - start < shortest or not text[end - 1].isalnum():
                continue
            window = text[start:end].casefold()
            if window in exact_entries:
                np.maximum(probs[start:end], exact_prob, out=probs[start:end])
            elif max_edit_distance == 1:
                if any(_within_one_edit(window, entry) for entry in fuzzy_entries):
                    np.maximum(probs[start:end], fuzzy_prob, out=probs[start:end])
    return CharProbTrack.from_dense(tweet.id, probs)


def tag_dataset(
    dataset: Dataset,
    lexicon: Lexicon,
    *,
    exact_prob: float = 0.9,
    fuzzy_prob: float = 0.6,
    max_edit_distance: int = 1,
    n_jobs: int = 1,
) -> dict[str, CharProbTrack]:
    """Tag every tweet; results are identical for any n_jobs."""

    def one(tweet: Tweet) -> CharProbTrack:
        return tag(
            tweet,
            lexicon,
            exact_prob=exact_prob,
            fuzzy_prob=fuzzy_prob,
            max_edit_distance=max_edit_distance,
        )

    if n_jobs == 1 or len(dataset) < 2:
        tracks = [one(t) for t in dataset]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            tracks = list(pool.map(one, dataset.tweets))
    return {track.tweet_id: track for track in tracks}


class GazetteerTagger(BaseEstimator):
    """Lexicon-matching tagger with the fit/predict estimator interface.

    fit() collects gold surfaces from the training dataset and merges the
    optional manual lexicon passed at construction; predict() emits one
    CharProbTrack per tweet.
    """

    def __init__(
        self,
        lexicon: Lexicon | None = None,
        exact_prob: float = 0.9,
        fuzzy_prob: float = 0.6,
        max_edit_distance: int = 1,
    ) -> None:
        self.lexicon = lexicon
        self.exact_prob = exact_prob
        self.fuzzy_prob = fuzzy_prob
        self.max_edit_distance = max_edit_distance

    def fit(self, dataset: Dataset, y: object = None) -> GazetteerTagger:
        learned = Lexicon.from_dataset(ensure_dataset(dataset))
        self.lexicon_ = (learned | self.lexicon) if self.lexicon is not None else learned
        return self

    def predict(self, dataset: Dataset, *, n_jobs: int = 1) -> dict[str, CharProbTrack]:
        check_is_fitted(self, "lexicon_")
        return tag_dataset(
            ensure_dataset(dataset),
            self.lexicon_,
            exact_prob=self.exact_prob,
            fuzzy_prob=self.fuzzy_prob,
            max_edit_distance=self.max_edit_distance,
            n_jobs=n_jobs,
        )


# ---------------------------------------------------------------------------
# Prediction files: one JSON object per line, runs as [start, end, prob].


def serialize_tracks(tracks: Mapping[str, CharProbTrack] | Iterable[CharProbTrack]) -> bytes:
    items = tracks.values() if isinstance(tracks, Mapping) else tracks
    lines = []
    for track in items:
        record = {
            "tweet_id": track.tweet_id,
            "length": track.length,
            "runs": [[s, e, p] for s, e, p in track.runs],
        }
        lines.append(json.dumps(record, ensure_ascii=False, separators=(",", ":")))
    return "".join(line + "\n" for line in lines).encode("utf-8")


def parse_tracks(data: bytes | str) -> dict[str, CharProbTrack]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    tracks: dict[str, CharProbTrack] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", line=line_no) from None
        if not isinstance(record, dict) or set(record) != {"tweet_id", "length", "runs"}:
            raise FormatError(
                "prediction record needs exactly the keys tweet_id, length, runs",
                line=line_no,
            )
        tweet_id, length, raw_runs = record["tweet_id"], record["length"], record["runs"]
        if not isinstance(tweet_id, str):
            raise FormatError("'tweet_id' must be a string", line=line_no)
        if isinstance(length, bool) or not isinstance(length, int):
            raise FormatError("'length' must be an integer", line=line_no)
        if not isinstance(raw_runs, list):
            raise FormatError("'runs' must be a list", line=line_no)
        runs = []
        for raw in raw_runs:
            if (
                not isinstance(raw, list)
                or len(raw) != 3
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
                or not isinstance(raw[0], int)
                or not isinstance(raw[1], int)
            ):
                raise FormatError(
                    "each run must be [start, end, prob] with integer bounds", line=line_no
                )
            runs.append((raw[0], raw[1], float(raw[2])))
        if tweet_id in tracks:
            raise FormatError(f"duplicate track for tweet {tweet_id!r}", line=line_no)
        try:
            tracks[tweet_id] = CharProbTrack(tweet_id, length, tuple(runs))
        except ValueError as exc:
            raise FormatError(str(exc), line=line_no) from None
    return tracks


def load_tracks(path: str | Path) -> dict[str, CharProbTrack]:
    path = Path(path)
    try:
        return parse_tracks(path.read_bytes())
    except FormatError as exc:
        raise exc.with_source(str(path)) from None


def save_tracks(
    tracks: Mapping[str, CharProbTrack] | Iterable[CharProbTrack], path: str | Path
) -> None:
    Path(path).write_bytes(serialize_tracks(tracks))
