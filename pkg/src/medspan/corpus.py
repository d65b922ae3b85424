"""Annotated tweet corpora: data model, JSONL/TSV round-tripping, stratified splits.

All offsets are half-open character intervals counted in Unicode code
points, which is exactly what Python string indexing uses. Every type is
immutable after construction and validates its own invariants, so a value
that exists is a value that is well formed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator

from ._rng import stream
from .exceptions import FormatError

JSONL = "jsonl"
TSV = "tsv"
FORMATS = (TSV, JSONL)

_TSV_HEADER = ("tweet_id", "user_id", "text", "span_start", "span_end", "drug")


@dataclass(frozen=True)
class Span:
    """Half-open character interval [start, end) with an optional surface string."""

    start: int
    end: int
    surface: str | None = None

    def __post_init__(self) -> None:
        for value in (self.start, self.end):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError("span offsets must be integers")
        if self.start < 0:
            raise ValueError(f"span start must be non-negative, got {self.start}")
        if self.end <= self.start:
            raise ValueError(f"empty or inverted span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def overlaps(self, other: Span) -> bool:
        return self.start < other.end and other.start < self.end

    def shifted(self, delta: int) -> Span:
        return Span(self.start + delta, self.end + delta, self.surface)


def check_spans(text: str, spans: Iterable[Span], *, what: str = "span") -> tuple[Span, ...]:
    """Validate a span list against its text.

    Enforces bounds, ascending-start order, pairwise disjointness, and
    surface agreement with the text slice. Returns the spans as a tuple.
    """
    out = tuple(spans)
    n = len(text)
    prev: Span | None = None
    for s in out:
        if s.end > n:
            raise ValueError(
                f"{what} [{s.start}, {s.end}) out of bounds for text of length {n}"
            )
        if prev is not None:
            if s.start < prev.start:
                raise ValueError(f"{what}s not sorted by start: {prev} before {s}")
            if s.start < prev.end:
                raise ValueError(f"overlapping {what}s [{prev.start}, {prev.end}) and [{s.start}, {s.end})")
        if s.surface is not None and text[s.start : s.end] != s.surface:
            raise ValueError(
                f"{what} surface mismatch at [{s.start}, {s.end}): "
                f"{s.surface!r} != {text[s.start:s.end]!r}"
            )
        prev = s
    return out


@dataclass(frozen=True)
class Tweet:
    """One tweet with its gold medication-mention spans (possibly none)."""

    id: str
    user_id: str
    text: str
    gold_spans: tuple[Span, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("tweet id must be non-empty")
        object.__setattr__(self, "gold_spans", check_spans(self.text, self.gold_spans, what="gold span"))

    @property
    def is_positive(self) -> bool:
        return bool(self.gold_spans)

    def surfaces(self) -> tuple[str, ...]:
        """Gold surface strings, sliced from the text when not stored."""
        return tuple(
            s.surface if s.surface is not None else self.text[s.start : s.end]
            for s in self.gold_spans
        )


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of tweets with unique ids.

    The name is a handle for humans and file naming; it does not take part
    in equality because neither serialization format stores it.
    """

    name: str = field(compare=False)
    tweets: tuple[Tweet, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tweets", tuple(self.tweets))
        seen: set[str] = set()
        for t in self.tweets:
            if t.id in seen:
                raise ValueError(f"duplicate tweet id {t.id!r}")
            seen.add(t.id)

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    def __getitem__(self, index: int) -> Tweet:
        return self.tweets[index]

    @cached_property
    def by_id(self) -> dict[str, Tweet]:
        return {t.id: t for t in self.tweets}

    @cached_property
    def positives(self) -> tuple[Tweet, ...]:
        return tuple(t for t in self.tweets if t.is_positive)

    @cached_property
    def negatives(self) -> tuple[Tweet, ...]:
        return tuple(t for t in self.tweets if not t.is_positive)

    @property
    def positive_count(self) -> int:
        return len(self.positives)

    @property
    def positive_ratio(self) -> float:
        if not self.tweets:
            return 0.0
        return self.positive_count / len(self.tweets)

    def renamed(self, name: str) -> Dataset:
        return replace(self, name=name)

    def with_tweets(self, tweets: Iterable[Tweet], *, name: str | None = None) -> Dataset:
        return Dataset(self.name if name is None else name, tuple(tweets))


# ---------------------------------------------------------------------------
# Parsing and serialization


def parse_dataset(data: bytes | str, format: str, *, name: str = "") -> Dataset:
    """Parse a JSONL or TSV byte stream into a Dataset.

    Raises FormatError with a line number for any malformed record,
    out-of-bounds span, surface mismatch, overlapping gold spans, or
    duplicate tweet id.
    """
    text = _decode(data)
    if format == JSONL:
        return _parse_jsonl(text, name)
    if format == TSV:
        return _parse_tsv(text, name)
    raise ValueError(f"unknown dataset format {format!r}, expected one of {FORMATS}")


def serialize_dataset(dataset: Dataset, format: str) -> bytes:
    """Serialize a Dataset to UTF-8 bytes. Inverse of parse_dataset."""
    if format == JSONL:
        return _serialize_jsonl(dataset)
    if format == TSV:
        return _serialize_tsv(dataset)
    raise ValueError(f"unknown dataset format {format!r}, expected one of {FORMATS}")


def format_of(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".tsv":
        return TSV
    if suffix == ".jsonl":
        return JSONL
    raise ValueError(f"cannot infer dataset format from {path!r}; pass format explicitly")


def load_dataset(path: str | Path, format: str | None = None) -> Dataset:
    path = Path(path)
    fmt = format or format_of(path)
    try:
        return parse_dataset(path.read_bytes(), fmt, name=path.stem)
    except FormatError as exc:
        raise exc.with_source(str(path)) from None


def save_dataset(dataset: Dataset, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = format or format_of(path)
    path.write_bytes(serialize_dataset(dataset, fmt))


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"input is not valid UTF-8: {exc}") from None


def _parse_jsonl(text: str, name: str) -> Dataset:
    tweets: list[Tweet] = []
    seen: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", line=line_no) from None
        try:
            tweet = _tweet_from_record(record)
        except ValueError as exc:
            raise FormatError(str(exc), line=line_no) from None
        if tweet.id in seen:
            raise FormatError(f"duplicate tweet id {tweet.id!r}", line=line_no)
        seen.add(tweet.id)
        tweets.append(tweet)
    return Dataset(name, tuple(tweets))


def _tweet_from_record(record: object) -> Tweet:
    if not isinstance(record, dict):
        raise ValueError("record must be a JSON object")
    unknown = set(record) - {"id", "user_id", "text", "spans"}
    if unknown:
        raise ValueError(f"unknown keys {sorted(unknown)}")
    try:
        tweet_id, user_id, text = record["id"], record["user_id"], record["text"]
        raw_spans = record["spans"]
    except KeyError as exc:
        raise ValueError(f"missing key {exc.args[0]!r}") from None
    for key, value in (("id", tweet_id), ("user_id", user_id), ("text", text)):
        if not isinstance(value, str):
            raise ValueError(f"{key!r} must be a string")
    if not isinstance(raw_spans, list):
        raise ValueError("'spans' must be a list")
    spans = []
    for raw in raw_spans:
        if not isinstance(raw, dict):
            raise ValueError("span must be a JSON object")
        unknown = set(raw) - {"start", "end", "surface"}
        if unknown:
            raise ValueError(f"unknown span keys {sorted(unknown)}")
        if "start" not in raw or "end" not in raw:
            raise ValueError("span needs 'start' and 'end'")
        start, end = raw["start"], raw["end"]
        if isinstance(start, bool) or isinstance(end, bool) or not isinstance(start, int) or not isinstance(end, int):
            raise ValueError("span offsets must be integers")
        surface = raw.get("surface")
        if surface is not None and not isinstance(surface, str):
            raise ValueError("span 'surface' must be a string when present")
        spans.append(Span(start, end, surface))
    return Tweet(tweet_id, user_id, text, tuple(spans))


def _serialize_jsonl(dataset: Dataset) -> bytes:
    lines = []
    for t in dataset:
        spans = []
        for s in t.gold_spans:
            span_obj: dict[str, object] = {"start": s.start, "end": s.end}
            if s.surface is not None:
                span_obj["surface"] = s.surface
            spans.append(span_obj)
        record = {"id": t.id, "user_id": t.user_id, "text": t.text, "spans": spans}
        lines.append(json.dumps(record, ensure_ascii=False, separators=(",", ":")))
    return "".join(line + "\n" for line in lines).encode("utf-8")


def _parse_tsv(text: str, name: str) -> Dataset:
    lines = text.splitlines()
    if not lines or tuple(lines[0].split("\t")) != _TSV_HEADER:
        raise FormatError("expected header columns " + ", ".join(_TSV_HEADER), line=1)
    tweets: list[Tweet] = []
    seen: set[str] = set()
    group: list[tuple[int, list[str]]] = []

    def flush() -> None:
        if not group:
            return
        first_line, first = group[0]
        tweet_id, user_id, text_field = first[0], first[1], first[2]
        for line_no, row in group[1:]:
            if row[1] != user_id or row[2] != text_field:
                raise FormatError(
                    f"rows for tweet {tweet_id!r} disagree on user_id or text", line=line_no
                )
        spans = []
        for line_no, row in group:
            raw_start, raw_end, drug = row[3], row[4], row[5]
            if raw_start == "" and raw_end == "":
                if len(group) > 1:
                    raise FormatError(
                        f"tweet {tweet_id!r} mixes empty and non-empty span rows", line=line_no
                    )
                if drug != "":
                    raise FormatError("span-less row must leave the drug column empty", line=line_no)
                continue
            if raw_start == "" or raw_end == "":
                raise FormatError("span_start and span_end must both be present", line=line_no)
            try:
                start, end = int(raw_start), int(raw_end)
            except ValueError:
                raise FormatError(
                    f"span offsets must be integers, got {raw_start!r}, {raw_end!r}", line=line_no
                ) from None
            try:
                spans.append(Span(start, end, drug if drug != "" else None))
            except ValueError as exc:
                raise FormatError(str(exc), line=line_no) from None
        try:
            tweet = Tweet(tweet_id, user_id, text_field, tuple(spans))
        except ValueError as exc:
            raise FormatError(str(exc), line=first_line) from None
        if tweet.id in seen:
            raise FormatError(f"duplicate tweet id {tweet.id!r}", line=first_line)
        seen.add(tweet.id)
        tweets.append(tweet)
        group.clear()

    for line_no, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        row = line.split("\t")
        if len(row) != 6:
            raise FormatError(f"expected 6 tab-separated fields, got {len(row)}", line=line_no)
        if not row[0]:
            raise FormatError("tweet_id must be non-empty", line=line_no)
        if group and row[0] != group[0][1][0]:
            flush()
        group.append((line_no, row))
    flush()
    return Dataset(name, tuple(tweets))


def _serialize_tsv(dataset: Dataset) -> bytes:
    rows = ["\t".join(_TSV_HEADER)]
    for t in dataset:
        for value, label in ((t.id, "tweet id"), (t.user_id, "user id"), (t.text, "text")):
            if any(c in value for c in "\t\n\r"):
                raise ValueError(
                    f"{label} of tweet {t.id!r} contains a tab or newline and "
                    "cannot be represented in TSV; use JSONL"
                )
        if not t.gold_spans:
            rows.append("\t".join((t.id, t.user_id, t.text, "", "", "")))
            continue
        for s in t.gold_spans:
            rows.append(
                "\t".join(
                    (t.id, t.user_id, t.text, str(s.start), str(s.end), s.surface or "")
                )
            )
    return "".join(row + "\n" for row in rows).encode("utf-8")


# ---------------------------------------------------------------------------
# Splitting


def _round_half_up(value: Fraction) -> int:
    return math.floor(value + Fraction(1, 2))


def stratified_split(dataset: Dataset, ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split into two parts, preserving the positive/negative balance.

    The first part receives round-half-up(ratio * count) tweets from each
    stratum; the remainder forms the second part. Selection is random per
    seed but tweets keep their original relative order inside each part.
    """
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    if len(dataset) == 0:
        raise ValueError("cannot split an empty dataset")
    rng = stream(seed, "split")
    first_ids: set[str] = set()
    for stratum in (dataset.positives, dataset.negatives):
        take = _round_half_up(Fraction(ratio) * len(stratum))
        order = rng.permutation(len(stratum))
        first_ids.update(stratum[i].id for i in order[:take])
    first = tuple(t for t in dataset if t.id in first_ids)
    second = tuple(t for t in dataset if t.id not in first_ids)
    return (
        Dataset(f"{dataset.name}-train", first),
        Dataset(f"{dataset.name}-valid", second),
    )


def with_spans(
    dataset: Dataset,
    spans_by_id: dict[str, list[Span]] | dict[str, tuple[Span, ...]],
    *,
    name: str | None = None,
) -> Dataset:
    """Rebuild each tweet with replacement spans, recomputing surfaces.

    Tweets absent from the mapping come out span-free; ids absent from the
    dataset are an error. This is how predicted spans become a dataset file.
    """
    unknown = sorted(set(spans_by_id) - set(t.id for t in dataset))
    if unknown:
        raise ValueError(f"spans given for unknown tweet ids: {unknown[:5]}")
    tweets = []
    for tweet in dataset:
        spans = tuple(
            Span(s.start, s.end, tweet.text[s.start : s.end])
            for s in sorted(spans_by_id.get(tweet.id, ()), key=lambda s: (s.start, s.end))
        )
        tweets.append(Tweet(tweet.id, tweet.user_id, tweet.text, spans))
    return Dataset(dataset.name if name is None else name, tuple(tweets))
