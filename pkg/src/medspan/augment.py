"""Data augmentation with exact span bookkeeping.

Four operations create new positive examples: upsampling, pair
concatenation, drug-name replacement, and paraphrasing through an external
command. Each op keeps gold offsets correct by construction and is
deterministic for a fixed seed regardless of processing order.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import warnings
from fractions import Fraction
from typing import Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from ._rng import stream
from .corpus import Dataset, Span, Tweet
from .exceptions import FormatError
from .lexicon import Lexicon
from .validation import check_open_unit, ensure_dataset


def upsample(dataset: Dataset, target_positive_ratio: float, seed: int) -> Dataset:
    """Append duplicated positives until their share reaches the target.

    Duplicates are sampled with replacement and given fresh ids suffixed
    ``#dupN``. The minimum number of copies is added: one fewer would leave
    the ratio below target. If the target is already met, the dataset is
    returned unchanged with a warning.
    """
    check_open_unit(target_positive_ratio, "target_positive_ratio")
    positives = dataset.positives
    if not positives:
        raise ValueError("dataset has no positive tweets to upsample")
    target = Fraction(target_positive_ratio)
    pos, total = len(positives), len(dataset)
    # (pos + n) / (total + n) >= target, solved for the smallest integer n.
    need = max(0, math.ceil((target * total - pos) / (1 - target)))
    if need == 0:
        warnings.warn(
            f"positive ratio {pos}/{total} already at or above target "
            f"{target_positive_ratio}; dataset unchanged"
        )
        return dataset
    rng = stream(seed, "upsample")
    picks = rng.integers(0, len(positives), size=need)
    copies_per_id: dict[str, int] = {}
    extra = []
    for pick in picks:
        source = positives[int(pick)]
        nth = copies_per_id.get(source.id, 0) + 1
        copies_per_id[source.id] = nth
        extra.append(
            Tweet(f"{source.id}#dup{nth}", source.user_id, source.text, source.gold_spans)
        )
    return dataset.with_tweets(dataset.tweets + tuple(extra))


def concat_pairs(
    dataset: Dataset, n: int, separator: str, seed: int
) -> list[Tweet]:
    """Build n tweets by joining random ordered pairs of distinct positives.

    The second tweet's spans shift right by len(first) + len(separator).
    """
    if n < 0:
        raise ValueError(f"pair count must be non-negative, got {n}")
    positives = dataset.positives
    if len(positives) < 2:
        raise ValueError("need at least 2 positive tweets to concatenate pairs")
    out = []
    for k in range(n):
        rng = stream(seed, "concat", k)
        i = int(rng.integers(0, len(positives)))
        j = int(rng.integers(0, len(positives) - 1))
        if j >= i:
            j += 1
        a, b = positives[i], positives[j]
        shift = len(a.text) + len(separator)
        out.append(
            Tweet(
                f"{a.id}+{b.id}#cat{k}",
                a.user_id,
                a.text + separator + b.text,
                a.gold_spans + tuple(s.shifted(shift) for s in b.gold_spans),
            )
        )
    return out


def replace_drug_names(
    tweet: Tweet, lexicon: Lexicon, seed: int, *, variant: int = 0
) -> Tweet:
    """Swap each gold surface for a random different lexicon entry.

    Later spans shift by the accumulated length difference. A span keeps its
    original surface when the lexicon offers no different entry. ``variant``
    distinguishes multiple replacement copies of the same tweet.
    """
    if not tweet.gold_spans:
        raise ValueError(f"tweet {tweet.id!r} has no gold spans to replace")
    if len(lexicon) == 0:
        raise ValueError("replacement lexicon is empty")
    rng = stream(seed, "replace", tweet.id, variant)
    entries = lexicon.sorted_entries()
    pieces = []
    new_spans = []
    cursor = 0
    delta = 0
    for span in tweet.gold_spans:
        original = tweet.text[span.start : span.end]
        candidates = [e for e in entries if e != original]
        replacement = (
            candidates[int(rng.integers(0, len(candidates)))] if candidates else original
        )
        pieces.append(tweet.text[cursor : span.start])
        pieces.append(replacement)
        start = span.start + delta
        new_spans.append(
            Span(start, start + len(replacement), replacement if span.surface is not None else None)
        )
        delta += len(replacement) - len(original)
        cursor = span.end
    pieces.append(tweet.text[cursor:])
    return Tweet(tweet.id, tweet.user_id, "".join(pieces), tuple(new_spans))


def relocate_spans(
    spans: Sequence[Span], source_text: str, new_text: str
) -> tuple[Span, ...] | None:
    """Map spans onto new_text by leftmost search of each surface, in order.

    Each search starts after the previous match, so the result is sorted and
    disjoint. Returns None when any surface cannot be placed.
    """
    out = []
    cursor = 0
    for span in spans:
        surface = span.surface if span.surface is not None else source_text[span.start : span.end]
        position = new_text.find(surface, cursor)
        if position < 0:
            return None
        out.append(Span(position, position + len(surface), span.surface and surface))
        cursor = position + len(surface)
    return tuple(out)


def paraphrase(dataset: Dataset, command: str | Sequence[str], seed: int = 0) -> list[Tweet]:
    """Paraphrase positive tweets through an external command.

    The command receives one JSON object per line on stdin ({"id", "text"})
    and must write one {"id", "paraphrases": [...]} object per input line to
    stdout, exiting 0. Paraphrases that do not contain every original drug
    surface verbatim are dropped with a counted warning; accepted ones get
    spans relocated by leftmost search and ids suffixed ``#paraN``.

    The seed is accepted for interface parity with the other augmentation
    ops; any randomness belongs to the external command.
    """
    del seed
    positives = dataset.positives
    if not positives:
        return []
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    payload = "".join(
        json.dumps({"id": t.id, "text": t.text}, ensure_ascii=False) + "\n" for t in positives
    )
    try:
        proc = subprocess.run(
            argv, input=payload.encode("utf-8"), capture_output=True, timeout=300
        )
    except OSError as exc:
        raise ValueError(f"failed to launch paraphrase command {argv!r}: {exc}") from None
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", "replace").strip()
        raise RuntimeError(
            f"paraphrase command exited with status {proc.returncode}"
            + (f": {stderr[:500]}" if stderr else "")
        )
    by_id = {t.id: t for t in positives}
    paraphrases: dict[str, list[str]] = {}
    for line_no, line in enumerate(proc.stdout.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(
                f"paraphrase command wrote invalid JSON: {exc.msg}", line=line_no
            ) from None
        if not isinstance(record, dict) or set(record) != {"id", "paraphrases"}:
            raise FormatError(
                "paraphrase output record needs exactly the keys 'id' and 'paraphrases'",
                line=line_no,
            )
        tweet_id, texts = record["id"], record["paraphrases"]
        if tweet_id not in by_id:
            raise FormatError(f"paraphrase output names unknown tweet {tweet_id!r}", line=line_no)
        if tweet_id in paraphrases:
            raise FormatError(f"duplicate paraphrase record for tweet {tweet_id!r}", line=line_no)
        if not isinstance(texts, list) or not all(isinstance(x, str) for x in texts):
            raise FormatError("'paraphrases' must be a list of strings", line=line_no)
        paraphrases[tweet_id] = texts
    out = []
    dropped = 0
    for tweet in positives:
        for index, text in enumerate(paraphrases.get(tweet.id, ())):
            spans = relocate_spans(tweet.gold_spans, tweet.text, text)
            if spans is None:
                dropped += 1
                continue
            out.append(Tweet(f"{tweet.id}#para{index}", tweet.user_id, text, spans))
    if dropped:
        warnings.warn(f"dropped {dropped} paraphrase(s) that lost a drug surface")
    return out


def replacement_copies(
    dataset: Dataset, lexicon: Lexicon, per_positive: int, seed: int
) -> list[Tweet]:
    """Replaced copies of every positive tweet, ids suffixed ``#repN``."""
    if per_positive < 0:
        raise ValueError(f"per_positive must be non-negative, got {per_positive}")
    out = []
    for tweet in dataset.positives:
        for j in range(per_positive):
            copy = replace_drug_names(tweet, lexicon, seed, variant=j)
            out.append(Tweet(f"{tweet.id}#rep{j}", copy.user_id, copy.text, copy.gold_spans))
    return out


# ---------------------------------------------------------------------------
# Transformer wrappers, composable with sklearn pipelines.


class Upsampler(BaseEstimator, TransformerMixin):
    """Dataset-to-dataset transformer around :func:`upsample`."""

    def __init__(self, target_positive_ratio: float = 0.25, seed: int = 0) -> None:
        self.target_positive_ratio = target_positive_ratio
        self.seed = seed

    def fit(self, dataset: Dataset, y: object = None) -> Upsampler:
        return self

    def transform(self, dataset: Dataset) -> Dataset:
        return upsample(ensure_dataset(dataset), self.target_positive_ratio, self.seed)


class PairConcatenator(BaseEstimator, TransformerMixin):
    """Append concatenated positive pairs to the dataset."""

    def __init__(self, n_pairs: int = 10, separator: str = " ", seed: int = 0) -> None:
        self.n_pairs = n_pairs
        self.separator = separator
        self.seed = seed

    def fit(self, dataset: Dataset, y: object = None) -> PairConcatenator:
        return self

    def transform(self, dataset: Dataset) -> Dataset:
        dataset = ensure_dataset(dataset)
        extra = concat_pairs(dataset, self.n_pairs, self.separator, self.seed)
        return dataset.with_tweets(dataset.tweets + tuple(extra))


class DrugNameReplacer(BaseEstimator, TransformerMixin):
    """Append replaced copies of positives, drawing names from a lexicon.

    fit() learns the corpus lexicon from gold surfaces and merges the
    optional manual lexicon given at construction.
    """

    def __init__(self, lexicon: Lexicon | None = None, per_positive: int = 1, seed: int = 0) -> None:
        self.lexicon = lexicon
        self.per_positive = per_positive
        self.seed = seed

    def fit(self, dataset: Dataset, y: object = None) -> DrugNameReplacer:
        learned = Lexicon.from_dataset(ensure_dataset(dataset))
        self.lexicon_ = learned | self.lexicon if self.lexicon is not None else learned
        return self

    def transform(self, dataset: Dataset) -> Dataset:
        dataset = ensure_dataset(dataset)
        lexicon = getattr(self, "lexicon_", None)
        if lexicon is None:
            lexicon = self.lexicon
        if lexicon is None:
            raise ValueError("no lexicon available; call fit() or pass one at construction")
        extra = replacement_copies(dataset, lexicon, self.per_positive, self.seed)
        return dataset.with_tweets(dataset.tweets + tuple(extra))


class Paraphraser(BaseEstimator, TransformerMixin):
    """Append paraphrases produced by an external command."""

    def __init__(self, command: str = "", seed: int = 0) -> None:
        self.command = command
        self.seed = seed

    def fit(self, dataset: Dataset, y: object = None) -> Paraphraser:
        return self

    def transform(self, dataset: Dataset) -> Dataset:
        if not self.command:
            raise ValueError("paraphrase command is empty")
        dataset = ensure_dataset(dataset)
        extra = paraphrase(dataset, self.command, self.seed)
        return dataset.with_tweets(dataset.tweets + tuple(extra))
