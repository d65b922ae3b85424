"""Strict and overlapping span evaluation, plus error categorization.

Strict credit requires exact (start, end) agreement; overlapping credit
requires at least one shared character, with predictions and gold matched
one-to-one. Both are micro-averaged over the corpus. When neither gold nor
predicted spans exist, precision and recall are defined as 1; when exactly
one side is empty they are 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Dataset, Span
from .lexicon import Lexicon


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, n_pred: int, n_gold: int) -> PRF:
        if n_pred == 0:
            precision = 1.0 if n_gold == 0 else 0.0
        else:
            precision = tp / n_pred
        if n_gold == 0:
            recall = 1.0 if n_pred == 0 else 0.0
        else:
            recall = tp / n_gold
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        return cls(precision, recall, f1)

    def to_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class MatchCounts:
    tp_strict: int
    tp_overlap: int
    n_pred: int
    n_gold: int


@dataclass(frozen=True)
class MetricsReport:
    strict: PRF
    overlapping: PRF
    counts: MatchCounts

    def to_dict(self) -> dict[str, object]:
        return {
            "strict": self.strict.to_dict(),
            "overlapping": self.overlapping.to_dict(),
            "counts": {
                "tp_strict": self.counts.tp_strict,
                "tp_overlap": self.counts.tp_overlap,
                "n_pred": self.counts.n_pred,
                "n_gold": self.counts.n_gold,
            },
        }


def _checked(spans: Sequence[Span], tweet_id: str) -> list[Span]:
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            raise ValueError(
                f"predicted spans for tweet {tweet_id!r} overlap: "
                f"[{a.start}, {a.end}) and [{b.start}, {b.end})"
            )
    return ordered


def strict_tp(gold: Sequence[Span], predicted: Sequence[Span]) -> int:
    """Count exact (start, end) agreements."""
    gold_set = {(s.start, s.end) for s in gold}
    return sum(1 for s in predicted if (s.start, s.end) in gold_set)


def overlap_pairs(
    gold: Sequence[Span], predicted: Sequence[Span]
) -> list[tuple[int, int]]:
    """One-to-one greedy matching in ascending start order.

    Both sides must be sorted and internally disjoint; under that
    precondition the greedy sweep attains the maximum possible number of
    pairs. Returns (gold index, predicted index) pairs.
    """
    pairs = []
    i = j = 0
    while i < len(gold) and j < len(predicted):
        g, p = gold[i], predicted[j]
        if g.overlaps(p):
            pairs.append((i, j))
            i += 1
            j += 1
        elif g.end <= p.start:
            i += 1
        else:
            j += 1
    return pairs


def evaluate(gold: Dataset, predictions: Mapping[str, Sequence[Span]]) -> MetricsReport:
    """Micro-averaged strict and overlapping precision/recall/F1.

    Every predicted tweet id must exist in the gold dataset; gold tweets
    without predictions count as having none.
    """
    unknown = sorted(set(predictions) - {t.id for t in gold})
    if unknown:
        raise ValueError(f"predictions name tweets not in the corpus: {unknown[:3]}")
    tp_strict = tp_overlap = n_pred = n_gold = 0
    for tweet in gold:
        predicted = _checked(predictions.get(tweet.id, ()), tweet.id)
        n_gold += len(tweet.gold_spans)
        n_pred += len(predicted)
        tp_strict += strict_tp(tweet.gold_spans, predicted)
        tp_overlap += len(overlap_pairs(tweet.gold_spans, predicted))
    return MetricsReport(
        strict=PRF.from_counts(tp_strict, n_pred, n_gold),
        overlapping=PRF.from_counts(tp_overlap, n_pred, n_gold),
        counts=MatchCounts(tp_strict, tp_overlap, n_pred, n_gold),
    )


FALSE_POSITIVE = "false_positive"
FN_RARE_DRUG = "fn_drug_not_or_rarely_seen"
FN_COMPLEX_PHRASE = "fn_complex_drug_phrase"
FN_OTHER = "fn_other"

_CATEGORIES = (FALSE_POSITIVE, FN_RARE_DRUG, FN_COMPLEX_PHRASE, FN_OTHER)


def _alphanumeric_words(surface: str) -> int:
    count = 0
    inside = False
    for ch in surface:
        if ch.isalnum():
            if not inside:
                count += 1
            inside = True
        else:
            inside = False
    return count


def categorize_errors(
    gold: Dataset,
    predictions: Mapping[str, Sequence[Span]],
    training_lexicon: Lexicon,
) -> dict[str, int]:
    """Tally prediction errors under overlapping matching.

    Unmatched predictions are false positives. Unmatched gold spans are
    categorized, first match wins: a phrase of three or more alphanumeric
    words or with an embedded hashtag is complex, a surface seen fewer
    than twice across the training lexicon's sources is rare, anything
    else is other.
    """
    unknown = sorted(set(predictions) - {t.id for t in gold})
    if unknown:
        raise ValueError(f"predictions name tweets not in the corpus: {unknown[:3]}")
    tally = dict.fromkeys(_CATEGORIES, 0)
    for tweet in gold:
        predicted = _checked(predictions.get(tweet.id, ()), tweet.id)
        pairs = overlap_pairs(tweet.gold_spans, predicted)
        matched_gold = {i for i, _ in pairs}
        matched_pred = {j for _, j in pairs}
        tally[FALSE_POSITIVE] += len(predicted) - len(matched_pred)
        for index, span in enumerate(tweet.gold_spans):
            if index in matched_gold:
                continue
            surface = tweet.text[span.start : span.end]
            if _alphanumeric_words(surface) >= 3 or "#" in surface:
                tally[FN_COMPLEX_PHRASE] += 1
            elif training_lexicon.count(surface) < 2:
                tally[FN_RARE_DRUG] += 1
            else:
                tally[FN_OTHER] += 1
    return tally


def format_report(reports: Mapping[str, MetricsReport]) -> str:
    """Fixed-width table with overlapping and strict metrics per row."""
    header = (
        f"{'model':<16} {'ov-F1':>7} {'ov-P':>7} {'ov-R':>7} "
        f"{'st-F1':>7} {'st-P':>7} {'st-R':>7}"
    )
    lines = [header, "-" * len(header)]
    for name, report in reports.items():
        o, s = report.overlapping, report.strict
        lines.append(
            f"{name:<16} {o.f1:>7.3f} {o.precision:>7.3f} {o.recall:>7.3f} "
            f"{s.f1:>7.3f} {s.precision:>7.3f} {s.recall:>7.3f}"
        )
    return "\n".join(lines)
