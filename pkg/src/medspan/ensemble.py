"""Character-level aggregation of per-model probability tracks.

The per-character ensemble score is the weighted sum of model
probabilities, normalized by the weight total; predicted spans are the
maximal runs where the score is at or above the threshold. The inclusive
comparison makes the equal-weights, 0.5-threshold configuration an exact
two-of-three majority vote.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .corpus import Dataset, Span
from .metrics import evaluate, overlap_pairs
from .postprocess import clean_spans
from .tagging import CharProbTrack
from .validation import check_open_unit, check_same_ids, check_tracks_match


def _check_weights(weights: Sequence[float], n_models: int) -> np.ndarray:
    array = np.asarray(weights, dtype=float)
    if array.ndim != 1 or array.size != n_models:
        raise ValueError(f"expected {n_models} weights, got shape {array.shape}")
    if not np.all(np.isfinite(array)) or np.any(array < 0):
        raise ValueError("weights must be finite and non-negative")
    if array.sum() <= 0:
        raise ValueError("weights must sum to a positive value")
    return array


def _runs_of(mask: np.ndarray) -> list[tuple[int, int]]:
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(s), int(e)) for s, e in zip(edges[::2], edges[1::2])]


def aggregate(
    tracks: Sequence[CharProbTrack], weights: Sequence[float], threshold: float
) -> list[Span]:
    """Combine one tweet's per-model tracks into predicted spans.

    Weights are normalized by their sum, so any positive rescaling leaves
    the result unchanged.
    """
    if not tracks:
        raise ValueError("need at least one track to aggregate")
    lengths = {t.length for t in tracks}
    if len(lengths) > 1:
        raise ValueError(f"tracks disagree on tweet length: {sorted(lengths)}")
    w = _check_weights(weights, len(tracks))
    check_open_unit(threshold, "threshold")
    scores = sum(wi * t.dense() for wi, t in zip(w, tracks)) / w.sum()
    return [Span(s, e) for s, e in _runs_of(scores >= threshold)]


def aggregate_sets(
    track_sets: Sequence[Mapping[str, CharProbTrack]],
    weights: Sequence[float],
    threshold: float,
) -> dict[str, list[Span]]:
    """Aggregate whole prediction sets; all sets must cover the same tweets."""
    ids = check_same_ids(track_sets)
    return {
        tweet_id: aggregate([ts[tweet_id] for ts in track_sets], weights, threshold)
        for tweet_id in ids
    }


def average(
    track_sets: Sequence[Mapping[str, CharProbTrack]],
    weights: Sequence[float] | None = None,
) -> dict[str, CharProbTrack]:
    """Per-character mean of the models' tracks, re-encoded as tracks.

    With weights, each character gets the normalized weighted sum, matching
    the score that aggregate() compares against the threshold.
    """
    ids = check_same_ids(track_sets)
    w = None if weights is None else _check_weights(weights, len(track_sets))
    out = {}
    for tweet_id in ids:
        tracks = [ts[tweet_id] for ts in track_sets]
        lengths = {t.length for t in tracks}
        if len(lengths) > 1:
            raise ValueError(
                f"tracks for tweet {tweet_id!r} disagree on length: {sorted(lengths)}"
            )
        if w is None:
            mean = sum(t.dense() for t in tracks) / len(tracks)
        else:
            mean = sum(wi * t.dense() for wi, t in zip(w, tracks)) / w.sum()
        out[tweet_id] = CharProbTrack.from_dense(tweet_id, mean)
    return out


class CharacterEnsemble(BaseEstimator):
    """Weighted character-vote ensemble with the fit/predict interface.

    With method=None, fit() simply freezes the constructor parameters
    (weights default to equal). With method="grid" or "tpe", fit() searches
    weights and threshold against a gold dataset, maximizing overlapping F1.
    """

    def __init__(
        self,
        weights: Sequence[float] | None = None,
        threshold: float = 0.5,
        method: str | None = None,
        budget: int = 100,
        resolution: int = 5,
        seed: int = 0,
        post: bool = False,
    ) -> None:
        self.weights = weights
        self.threshold = threshold
        self.method = method
        self.budget = budget
        self.resolution = resolution
        self.seed = seed
        self.post = post

    def fit(
        self,
        track_sets: Sequence[Mapping[str, CharProbTrack]],
        gold: Dataset | None = None,
    ) -> CharacterEnsemble:
        n_models = len(track_sets)
        if n_models == 0:
            raise ValueError("need at least one prediction set")
        if self.method is None:
            raw = [1.0] * n_models if self.weights is None else list(self.weights)
            _check_weights(raw, n_models)
            check_open_unit(self.threshold, "threshold")
            self.weights_ = tuple(raw)
            self.threshold_ = float(self.threshold)
            return self
        if gold is None:
            raise ValueError(f"method {self.method!r} needs a gold dataset to search against")
        from .hpo import ensemble_search_space, optimize

        objective = ensemble_objective(track_sets, gold, post=self.post)
        best, history = optimize(
            ensemble_search_space(n_models),
            objective,
            method=self.method,
            budget=self.budget,
            seed=self.seed,
            resolution=self.resolution,
        )
        self.weights_ = tuple(best.params[f"w{i}"] for i in range(n_models))
        self.threshold_ = best.params["threshold"]
        self.history_ = history
        return self

    def predict(
        self, track_sets: Sequence[Mapping[str, CharProbTrack]]
    ) -> dict[str, list[Span]]:
        check_is_fitted(self, "weights_")
        return aggregate_sets(track_sets, self.weights_, self.threshold_)


def ensemble_objective(
    track_sets: Sequence[Mapping[str, CharProbTrack]],
    gold: Dataset,
    *,
    post: bool = False,
) -> Callable[[Mapping[str, float]], float]:
    """Overlapping-F1 objective over weights w0..wN and threshold.

    The returned callable is what the hyperparameter search evaluates. An
    all-zero weight vector denotes an empty ensemble and scores as if no
    spans were predicted. Aside from that guard, the value equals
    evaluate(gold, aggregate_sets(...)).overlapping.f1.
    """
    ids = check_same_ids(track_sets)
    for tracks in track_sets:
        check_tracks_match(gold, tracks)
    n_models = len(track_sets)
    tweets = [gold.by_id[tweet_id] for tweet_id in ids]
    max_len = max((len(t.text) for t in tweets), default=0)
    dense = np.zeros((n_models, len(tweets), max_len))
    for m, tracks in enumerate(track_sets):
        for i, tweet in enumerate(tweets):
            dense[m, i, : len(tweet.text)] = tracks[tweet.id].dense()
    gold_spans = [t.gold_spans for t in tweets]
    n_gold = sum(len(spans) for spans in gold_spans)

    def objective(params: Mapping[str, float]) -> float:
        w = np.array([params[f"w{i}"] for i in range(n_models)], dtype=float)
        threshold = params["threshold"]
        total = w.sum()
        if total <= 0:
            return 0.0 if n_gold else 1.0
        scores = np.tensordot(w, dense, axes=1) / total
        tp = 0
        n_pred = 0
        for i, tweet in enumerate(tweets):
            mask = scores[i, : len(tweet.text)] >= threshold
            spans = [Span(s, e) for s, e in _runs_of(mask)]
            if post:
                spans = clean_spans(tweet.text, spans)
            n_pred += len(spans)
            tp += len(overlap_pairs(gold_spans[i], spans))
        if n_pred == 0 or n_gold == 0:
            return 1.0 if n_pred == n_gold else 0.0
        precision = tp / n_pred
        recall = tp / n_gold
        if precision + recall == 0:
            return 0.0
        return 2 * precision * recall / (precision + recall)

    return objective
