"""Span post-processing: hashtag stripping and edge trimming.

Both operations only ever shrink spans, never widen or merge them, and drop
spans that become empty.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .corpus import Dataset, Span


def _rebuilt(span: Span, start: int, end: int, text: str) -> Span:
    surface = text[start:end] if span.surface is not None else None
    return Span(start, end, surface)


def strip_hashtags(text: str, spans: Sequence[Span]) -> list[Span]:
    """Remove leading '#' characters from each span; drop emptied spans."""
    out = []
    for span in spans:
        start = span.start
        while start < span.end and text[start] == "#":
            start += 1
        if start < span.end:
            out.append(_rebuilt(span, start, span.end, text))
    return out


def trim_edges(
    text: str, spans: Sequence[Span], trim_chars: Iterable[str] | None = None
) -> list[Span]:
    """Shave trimmable characters off both span edges; drop emptied spans.

    By default every non-alphanumeric character is trimmable. Interior
    characters are never touched.
    """
    if trim_chars is None:
        trimmable = lambda ch: not ch.isalnum()  # noqa: E731
    else:
        charset = frozenset(trim_chars)
        trimmable = lambda ch: ch in charset  # noqa: E731
    out = []
    for span in spans:
        start, end = span.start, span.end
        while start < end and trimmable(text[start]):
            start += 1
        while end > start and trimmable(text[end - 1]):
            end -= 1
        if start < end:
            out.append(_rebuilt(span, start, end, text))
    return out


def clean_spans(
    text: str,
    spans: Sequence[Span],
    *,
    hashtags: bool = True,
    trim: bool = True,
    trim_chars: Iterable[str] | None = None,
) -> list[Span]:
    """Apply hashtag stripping, then edge trimming."""
    cleaned = list(spans)
    if hashtags:
        cleaned = strip_hashtags(text, cleaned)
    if trim:
        cleaned = trim_edges(text, cleaned, trim_chars)
    return cleaned


def clean_predictions(
    gold: Dataset,
    predictions: Mapping[str, Sequence[Span]],
    *,
    hashtags: bool = True,
    trim: bool = True,
    trim_chars: Iterable[str] | None = None,
) -> dict[str, list[Span]]:
    """Post-process a whole prediction set using the dataset's texts."""
    unknown = sorted(set(predictions) - {t.id for t in gold})
    if unknown:
        raise ValueError(f"predictions name tweets not in the dataset: {unknown[:3]}")
    return {
        tweet_id: clean_spans(
            gold.by_id[tweet_id].text,
            spans,
            hashtags=hashtags,
            trim=trim,
            trim_chars=trim_chars,
        )
        for tweet_id, spans in predictions.items()
    }
