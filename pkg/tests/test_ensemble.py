from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.exceptions import NotFittedError

from medspan import (
    CharacterEnsemble,
    CharProbTrack,
    Dataset,
    Span,
    Tweet,
    aggregate,
    aggregate_sets,
    average,
    clean_predictions,
    ensemble_objective,
    evaluate,
)

from .util import char_scores, spans_from_scores


def track(tweet_id: str, length: int, *runs: tuple[int, int, float]) -> CharProbTrack:
    return CharProbTrack(tweet_id, length, runs)


def vote_tracks(votes: tuple[int, ...], length: int = 4) -> list[CharProbTrack]:
    return [
        track("t1", length, *([(0, length, 1.0)] if vote else []))
        for vote in votes
    ]


class TestAggregate:
    def test_two_of_three_vote_passes_half(self):
        spans = aggregate(vote_tracks((1, 1, 0)), [1, 1, 1], 0.5)
        assert spans == [Span(0, 4)]

    def test_one_of_three_vote_fails_half(self):
        assert aggregate(vote_tracks((1, 0, 0)), [1, 1, 1], 0.5) == []

    def test_threshold_comparison_is_inclusive(self):
        # two of three at full confidence scores exactly 2/3
        spans = aggregate(vote_tracks((1, 1, 0)), [1, 1, 1], 2 / 3)
        assert spans == [Span(0, 4)]

    def test_soft_probabilities_average(self):
        tracks = [track("t1", 4, (0, 4, 0.4)), track("t1", 4, (0, 4, 0.8))]
        assert aggregate(tracks, [1, 1], 0.5) == [Span(0, 4)]
        assert aggregate(tracks, [1, 1], 0.7) == []

    def test_zero_weight_silences_a_model(self):
        tracks = [track("t1", 4, (0, 2, 0.9)), track("t1", 4, (2, 4, 0.9))]
        assert aggregate(tracks, [2, 0], 0.5) == [Span(0, 2)]

    def test_staggered_tracks_split_runs(self):
        tracks = [track("t1", 6, (0, 4, 0.9)), track("t1", 6, (2, 6, 0.9))]
        # means: 0.45 on [0,2), 0.9 on [2,4), 0.45 on [4,6)
        assert aggregate(tracks, [1, 1], 0.5) == [Span(2, 4)]
        assert aggregate(tracks, [1, 1], 0.4) == [Span(0, 6)]

    def test_multiple_runs_preserved(self):
        tracks = [track("t1", 10, (0, 2, 1.0), (5, 7, 1.0))]
        assert aggregate(tracks, [1], 0.5) == [Span(0, 2), Span(5, 7)]

    def test_no_tracks_rejected(self):
        with pytest.raises(ValueError, match="at least one track"):
            aggregate([], [1], 0.5)

    def test_length_disagreement_rejected(self):
        with pytest.raises(ValueError, match="disagree on tweet length"):
            aggregate([track("t1", 4), track("t1", 5)], [1, 1], 0.5)

    def test_weight_count_checked(self):
        with pytest.raises(ValueError, match="expected 2 weights"):
            aggregate(vote_tracks((1, 0)), [1, 1, 1], 0.5)

    @pytest.mark.parametrize("weights", [[-1, 2], [np.nan, 1], [np.inf, 1], [0, 0]])
    def test_bad_weights_rejected(self, weights):
        with pytest.raises(ValueError, match="weights"):
            aggregate(vote_tracks((1, 0)), weights, 0.5)

    @pytest.mark.parametrize("threshold", [0.0, 1.0, -0.1, 1.1])
    def test_threshold_open_interval(self, threshold):
        with pytest.raises(ValueError, match="threshold"):
            aggregate(vote_tracks((1, 1)), [1, 1], threshold)

    @settings(max_examples=200)
    @given(
        probs=st.lists(
            st.tuples(
                st.integers(0, 16).map(lambda i: i / 16),
                st.integers(0, 16).map(lambda i: i / 16),
                st.integers(0, 16).map(lambda i: i / 16),
            ),
            min_size=1,
            max_size=12,
        ),
        weights=st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)).filter(
            lambda w: sum(w) > 0
        ),
        threshold_num=st.integers(1, 127),
    )
    def test_matches_dense_oracle(self, probs, weights, threshold_num):
        # sixteenth-grid probs and integer weights make every partial sum and
        # the final quotient exactly representable, so the oracle's per-char
        # arithmetic agrees bit for bit no matter the summation order
        threshold = threshold_num / 128
        length = len(probs)
        columns = list(zip(*probs))
        tracks = [
            CharProbTrack.from_dense("t1", np.array(col)) for col in columns
        ]
        expected = spans_from_scores(
            char_scores([list(col) for col in columns], list(weights)), threshold
        )
        assert [(s.start, s.end) for s in aggregate(tracks, weights, threshold)] == expected

    @settings(max_examples=100)
    @given(
        probs=st.lists(st.integers(0, 16).map(lambda i: i / 16), min_size=1, max_size=10),
        scale=st.integers(1, 5),
    )
    def test_weight_rescaling_invariance(self, probs, scale):
        tracks = [
            CharProbTrack.from_dense("t1", np.array(probs)),
            CharProbTrack.from_dense("t1", np.array(probs[::-1])),
        ]
        base = aggregate(tracks, [1, 2], 0.5)
        scaled = aggregate(tracks, [scale, 2 * scale], 0.5)
        assert base == scaled


class TestAggregateSets:
    def test_orders_by_first_set(self):
        set_a = {"t2": track("t2", 3), "t1": track("t1", 4, (0, 4, 1.0))}
        set_b = {"t1": track("t1", 4, (0, 4, 1.0)), "t2": track("t2", 3)}
        result = aggregate_sets([set_a, set_b], [1, 1], 0.5)
        assert list(result) == ["t2", "t1"]
        assert result["t1"] == [Span(0, 4)]
        assert result["t2"] == []

    def test_id_mismatch_rejected(self):
        set_a = {"t1": track("t1", 3)}
        set_b = {"t2": track("t2", 3)}
        with pytest.raises(ValueError, match="does not cover the same tweets"):
            aggregate_sets([set_a, set_b], [1, 1], 0.5)

    def test_empty_sequence_rejected(self):
        with pytest.raises(ValueError, match="at least one prediction set"):
            aggregate_sets([], [], 0.5)


class TestAverage:
    def test_staggered_means(self):
        sets = [
            {"t1": track("t1", 6, (0, 4, 0.9))},
            {"t1": track("t1", 6, (2, 6, 0.9))},
        ]
        averaged = average(sets)
        assert averaged["t1"].runs == ((0, 2, 0.45), (2, 4, 0.9), (4, 6, 0.45))

    def test_single_set_is_identity(self):
        sets = [{"t1": track("t1", 5, (1, 3, 0.7))}]
        assert average(sets) == sets[0]

    def test_weighted_mean(self):
        sets = [
            {"t1": track("t1", 2, (0, 2, 1.0))},
            {"t1": track("t1", 2)},
        ]
        averaged = average(sets, [3, 1])
        assert averaged["t1"].runs == ((0, 2, 0.75),)

    def test_zero_mean_chars_elided(self):
        sets = [{"t1": track("t1", 4, (0, 2, 0.5))}, {"t1": track("t1", 4)}]
        averaged = average(sets)
        assert averaged["t1"].runs == ((0, 2, 0.25),)

    def test_length_disagreement_names_tweet(self):
        sets = [{"t1": track("t1", 4)}, {"t1": track("t1", 5)}]
        with pytest.raises(ValueError, match="'t1' disagree on length"):
            average(sets)

    @settings(max_examples=100)
    @given(
        probs=st.lists(
            st.tuples(
                st.integers(0, 16).map(lambda i: i / 16),
                st.integers(0, 16).map(lambda i: i / 16),
                st.integers(0, 16).map(lambda i: i / 16),
            ),
            min_size=1,
            max_size=10,
        ),
        threshold_num=st.integers(1, 127),
    )
    def test_average_then_threshold_matches_aggregate(self, probs, threshold_num):
        # equal weights: thresholding the averaged track must reproduce
        # aggregate() exactly on the sixteenth grid
        threshold = threshold_num / 128
        columns = list(zip(*probs))
        sets = [{"t1": CharProbTrack.from_dense("t1", np.array(col))} for col in columns]
        averaged = average(sets)
        rethresholded = aggregate([averaged["t1"]], [1.0], threshold)
        direct = aggregate([s["t1"] for s in sets], [1.0] * 3, threshold)
        assert rethresholded == direct


class TestCharacterEnsemble:
    def test_fixed_params_freeze_on_fit(self):
        sets = [{"t1": track("t1", 4, (0, 4, 1.0))}, {"t1": track("t1", 4)}]
        model = CharacterEnsemble(weights=[2, 1], threshold=0.6).fit(sets)
        assert model.weights_ == (2, 1)
        assert model.threshold_ == 0.6
        assert model.predict(sets) == {"t1": [Span(0, 4)]}

    def test_default_weights_equal(self):
        sets = [{"t1": track("t1", 4, (0, 4, 1.0))}, {"t1": track("t1", 4)}]
        model = CharacterEnsemble().fit(sets)
        assert model.weights_ == (1.0, 1.0)
        assert model.predict(sets) == {"t1": [Span(0, 4)]}

    def test_predict_before_fit_rejected(self):
        with pytest.raises(NotFittedError):
            CharacterEnsemble().predict([{"t1": track("t1", 4)}])

    def test_search_method_requires_gold(self):
        with pytest.raises(ValueError, match="gold dataset"):
            CharacterEnsemble(method="grid").fit([{"t1": track("t1", 4)}])

    def test_no_sets_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            CharacterEnsemble().fit([])

    def test_grid_fit_recovers_good_model(self):
        # model 0 marks gold exactly; model 1 is pure noise; the search should
        # find weights that reach a perfect overlapping F1
        gold = Dataset(
            "d",
            (
                Tweet("t1", "u1", "took tylenol", (Span(5, 12, "tylenol"),)),
                Tweet("t2", "u1", "just tea"),
            ),
        )
        sets = [
            {"t1": track("t1", 12, (5, 12, 1.0)), "t2": track("t2", 8)},
            {"t1": track("t1", 12, (0, 3, 1.0)), "t2": track("t2", 8, (0, 8, 1.0))},
        ]
        model = CharacterEnsemble(method="grid", resolution=3, budget=200).fit(sets, gold)
        assert len(model.history_) <= 200
        predictions = model.predict(sets)
        report = evaluate(gold, predictions)
        assert report.overlapping.f1 == 1.0


class TestEnsembleObjective:
    def make_corpus(self):
        gold = Dataset(
            "d",
            (
                Tweet("t1", "u1", "took tylenol", (Span(5, 12, "tylenol"),)),
                Tweet("t2", "u1", "#tea time!"),
            ),
        )
        sets = [
            {"t1": track("t1", 12, (5, 12, 1.0)), "t2": track("t2", 10)},
            {"t1": track("t1", 12, (5, 12, 0.5)), "t2": track("t2", 10, (0, 4, 1.0))},
        ]
        return gold, sets

    def test_matches_evaluate(self):
        gold, sets = self.make_corpus()
        objective = ensemble_objective(sets, gold)
        params = {"w0": 1.0, "w1": 1.0, "threshold": 0.5}
        expected = evaluate(gold, aggregate_sets(sets, [1.0, 1.0], 0.5)).overlapping.f1
        assert objective(params) == expected

    def test_post_flag_matches_cleaned_evaluation(self):
        gold, sets = self.make_corpus()
        objective = ensemble_objective(sets, gold, post=True)
        params = {"w0": 1.0, "w1": 3.0, "threshold": 0.5}
        raw = aggregate_sets(sets, [1.0, 3.0], 0.5)
        expected = evaluate(gold, clean_predictions(gold, raw)).overlapping.f1
        assert objective(params) == expected

    def test_all_zero_weights_mean_no_predictions(self):
        gold, sets = self.make_corpus()
        objective = ensemble_objective(sets, gold)
        assert objective({"w0": 0.0, "w1": 0.0, "threshold": 0.5}) == 0.0

    def test_all_zero_weights_on_spanless_gold(self):
        gold = Dataset("d", (Tweet("t1", "u1", "just tea"),))
        sets = [{"t1": track("t1", 8, (0, 3, 1.0))}]
        objective = ensemble_objective(sets, gold)
        assert objective({"w0": 0.0, "threshold": 0.5}) == 1.0

    def test_track_cover_validated_up_front(self):
        gold, sets = self.make_corpus()
        with pytest.raises(ValueError, match="do not cover"):
            ensemble_objective([{"t1": sets[0]["t1"]}], gold)

    @settings(max_examples=100, deadline=None)
    @given(
        data=st.data(),
        n_models=st.integers(1, 3),
        weights_raw=st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)),
        threshold_num=st.integers(1, 127),
    )
    def test_agrees_with_evaluate_on_dyadic_grid(
        self, data, n_models, weights_raw, threshold_num
    ):
        threshold = threshold_num / 128
        weights = list(weights_raw[:n_models])
        n_tweets = data.draw(st.integers(1, 3))
        tweets = []
        sets: list[dict[str, CharProbTrack]] = [{} for _ in range(n_models)]
        for i in range(n_tweets):
            length = data.draw(st.integers(1, 8))
            text = "x" * length
            gold_mask = data.draw(st.lists(st.booleans(), min_size=length, max_size=length))
            spans = [
                Span(s, e)
                for s, e in spans_from_scores([1.0 if m else 0.0 for m in gold_mask], 0.5)
            ]
            tweets.append(Tweet(f"t{i}", "u1", text, tuple(spans)))
            for m in range(n_models):
                probs = data.draw(
                    st.lists(
                        st.integers(0, 16).map(lambda k: k / 16),
                        min_size=length,
                        max_size=length,
                    )
                )
                sets[m][f"t{i}"] = CharProbTrack.from_dense(f"t{i}", np.array(probs))
        gold = Dataset("d", tuple(tweets))
        objective = ensemble_objective(sets, gold)
        params = {f"w{m}": float(weights[m]) for m in range(n_models)}
        params["threshold"] = threshold
        value = objective(params)
        if sum(weights) == 0:
            assert value == (1.0 if not any(t.gold_spans for t in tweets) else 0.0)
        else:
            report = evaluate(gold, aggregate_sets(sets, weights, threshold))
            assert value == report.overlapping.f1
