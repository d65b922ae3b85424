from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medspan import (
    Dataset,
    FormatError,
    Span,
    Tweet,
    format_of,
    load_dataset,
    parse_dataset,
    save_dataset,
    serialize_dataset,
    stratified_split,
    with_spans,
)

from .strategies import datasets


def record(**overrides) -> str:
    base = {
        "id": "t1",
        "user_id": "u1",
        "text": "took tylenol",
        "spans": [{"start": 5, "end": 12, "surface": "tylenol"}],
    }
    base.update(overrides)
    return json.dumps(base)


class TestSpan:
    def test_length_and_overlap(self):
        assert len(Span(5, 12)) == 7
        assert Span(0, 3).overlaps(Span(2, 5))
        assert not Span(0, 3).overlaps(Span(3, 5))

    def test_shifted_keeps_surface(self):
        assert Span(5, 12, "tylenol").shifted(3) == Span(8, 15, "tylenol")

    @pytest.mark.parametrize("start,end", [(-1, 2), (3, 3), (5, 2)])
    def test_rejects_bad_offsets(self, start, end):
        with pytest.raises(ValueError):
            Span(start, end)

    def test_rejects_non_integer_offsets(self):
        with pytest.raises(ValueError):
            Span(0.0, 2)
        with pytest.raises(ValueError):
            Span(True, 2)


class TestTweet:
    def test_surfaces_fall_back_to_slices(self):
        tweet = Tweet("t1", "u1", "took tylenol", (Span(5, 12),))
        assert tweet.surfaces() == ("tylenol",)

    def test_rejects_out_of_bounds_span(self):
        with pytest.raises(ValueError, match="out of bounds"):
            Tweet("t1", "u1", "took tylenol", (Span(5, 99),))

    def test_rejects_surface_mismatch(self):
        with pytest.raises(ValueError, match="surface mismatch"):
            Tweet("t1", "u1", "took tylenol", (Span(5, 12, "tyleno"),))

    def test_rejects_overlapping_gold_spans(self):
        with pytest.raises(ValueError, match="overlapping"):
            Tweet("t1", "u1", "took tylenol", (Span(0, 6), Span(5, 12)))

    def test_rejects_unsorted_spans(self):
        with pytest.raises(ValueError, match="sorted"):
            Tweet("t1", "u1", "took tylenol", (Span(5, 12), Span(0, 4)))

    def test_rejects_empty_id(self):
        with pytest.raises(ValueError, match="id"):
            Tweet("", "u1", "hi")


class TestDataset:
    def test_rejects_duplicate_ids(self):
        tweet = Tweet("t1", "u1", "hello")
        with pytest.raises(ValueError, match="duplicate"):
            Dataset("d", (tweet, tweet))

    def test_equality_ignores_name(self, tiny_corpus):
        assert tiny_corpus.renamed("other") == tiny_corpus

    def test_positive_accessors(self, tiny_corpus):
        assert tiny_corpus.positive_count == 2
        assert tiny_corpus.positive_ratio == 0.5
        assert {t.id for t in tiny_corpus.positives} == {"t1", "t3"}
        assert {t.id for t in tiny_corpus.negatives} == {"t2", "t4"}


class TestJsonl:
    def test_single_record(self):
        dataset = parse_dataset(record(), "jsonl")
        assert len(dataset) == 1
        assert dataset[0].gold_spans == (Span(5, 12, "tylenol"),)

    def test_blank_lines_skipped(self):
        dataset = parse_dataset(record() + "\n\n" + record(id="t2") + "\n", "jsonl")
        assert [t.id for t in dataset] == ["t1", "t2"]

    def test_out_of_bounds_span_names_line(self):
        data = record(id="t0") + "\n" + record(spans=[{"start": 5, "end": 99}])
        with pytest.raises(FormatError, match="line 2.*out of bounds"):
            parse_dataset(data, "jsonl")

    def test_surface_mismatch_rejected(self):
        data = record(spans=[{"start": 5, "end": 12, "surface": "tyleno"}])
        with pytest.raises(FormatError, match="surface mismatch"):
            parse_dataset(data, "jsonl")

    def test_unknown_keys_rejected(self):
        with pytest.raises(FormatError, match="unknown.*key"):
            parse_dataset(record(extra=1), "jsonl")
        bad_span = record(spans=[{"start": 5, "end": 12, "length": 7}])
        with pytest.raises(FormatError, match="unknown.*key"):
            parse_dataset(bad_span, "jsonl")

    def test_boolean_offsets_rejected(self):
        with pytest.raises(FormatError, match="integer"):
            parse_dataset(record(spans=[{"start": True, "end": 12}]), "jsonl")

    def test_duplicate_ids_rejected(self):
        with pytest.raises(FormatError, match="line 2.*duplicate"):
            parse_dataset(record() + "\n" + record(), "jsonl")

    def test_invalid_json_names_line(self):
        with pytest.raises(FormatError, match="line 1.*invalid JSON"):
            parse_dataset("not json", "jsonl")


class TestTsv:
    def test_round_trip_with_negatives_and_multi_span(self, tiny_corpus):
        data = serialize_dataset(tiny_corpus, "tsv")
        assert parse_dataset(data, "tsv") == tiny_corpus

    def test_header_required(self):
        with pytest.raises(FormatError, match="header"):
            parse_dataset("t1\tu1\thello\t\t\t", "tsv")

    def test_negative_row_keeps_empty_span_fields(self):
        data = serialize_dataset(Dataset("d", (Tweet("t1", "u1", "hello"),)), "tsv")
        lines = data.decode().splitlines()
        assert lines[1] == "t1\tu1\thello\t\t\t"

    def test_multi_span_rows_consecutive(self, tiny_corpus):
        lines = serialize_dataset(tiny_corpus, "tsv").decode().splitlines()
        t3_rows = [line for line in lines if line.startswith("t3\t")]
        assert len(t3_rows) == 2

    def test_wrong_column_count_rejected(self):
        header = "tweet_id\tuser_id\ttext\tspan_start\tspan_end\tdrug"
        with pytest.raises(FormatError, match="line 2.*6 tab-separated"):
            parse_dataset(header + "\nt1\tu1\thello", "tsv")

    def test_mixed_empty_and_filled_span_rows_rejected(self):
        header = "tweet_id\tuser_id\ttext\tspan_start\tspan_end\tdrug"
        rows = ["t1\tu1\ttook tylenol\t5\t12\ttylenol", "t1\tu1\ttook tylenol\t\t\t"]
        with pytest.raises(FormatError, match="span"):
            parse_dataset(header + "\n" + "\n".join(rows), "tsv")

    def test_disagreeing_text_rejected(self):
        header = "tweet_id\tuser_id\ttext\tspan_start\tspan_end\tdrug"
        rows = ["t1\tu1\ttook tylenol\t5\t12\ttylenol", "t1\tu1\tother text\t0\t4\tothe"]
        with pytest.raises(FormatError, match="agree"):
            parse_dataset(header + "\n" + "\n".join(rows), "tsv")

    def test_non_integer_offset_rejected(self):
        header = "tweet_id\tuser_id\ttext\tspan_start\tspan_end\tdrug"
        with pytest.raises(FormatError, match="integer"):
            parse_dataset(header + "\nt1\tu1\ttook tylenol\tfive\t12\ttylenol", "tsv")

    def test_tab_in_text_unserializable(self):
        dataset = Dataset("d", (Tweet("t1", "u1", "has\ttab"),))
        with pytest.raises(ValueError, match="JSONL"):
            serialize_dataset(dataset, "tsv")


class TestSerialization:
    def test_empty_dataset(self):
        assert serialize_dataset(Dataset("d"), "jsonl") == b""
        assert serialize_dataset(Dataset("d"), "tsv") == (
            b"tweet_id\tuser_id\ttext\tspan_start\tspan_end\tdrug\n"
        )

    def test_double_serialization_identical(self, tiny_corpus):
        for fmt in ("jsonl", "tsv"):
            assert serialize_dataset(tiny_corpus, fmt) == serialize_dataset(tiny_corpus, fmt)

    def test_unknown_format_rejected(self, tiny_corpus):
        with pytest.raises(ValueError, match="format"):
            serialize_dataset(tiny_corpus, "csv")
        with pytest.raises(ValueError, match="format"):
            parse_dataset("", "csv")

    def test_surface_omitted_when_absent(self):
        dataset = Dataset("d", (Tweet("t1", "u1", "took tylenol", (Span(5, 12),)),))
        line = serialize_dataset(dataset, "jsonl").decode().strip()
        assert "surface" not in json.loads(line)["spans"][0]

    @settings(max_examples=200)
    @given(datasets(), st.sampled_from(["jsonl", "tsv"]))
    def test_round_trip_identity(self, dataset, fmt):
        assert parse_dataset(serialize_dataset(dataset, fmt), fmt) == dataset


class TestFiles:
    def test_format_of(self):
        assert format_of("x.tsv") == "tsv"
        assert format_of("x.jsonl") == "jsonl"
        with pytest.raises(ValueError, match="format"):
            format_of("x.csv")

    def test_load_save_round_trip(self, tiny_corpus, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_dataset(tiny_corpus, path)
        loaded = load_dataset(path)
        assert loaded == tiny_corpus
        assert loaded.name == "corpus"

    def test_load_error_names_file(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(record(spans=[{"start": 5, "end": 99}]))
        with pytest.raises(FormatError, match="bad.jsonl: line 1"):
            load_dataset(path)


class TestUnicodeOffsets:
    def test_emoji_counts_as_one_character(self):
        plain = Tweet("t1", "u1", "took tylenol", (Span(5, 12, "tylenol"),))
        decorated = Tweet("t2", "u1", "🤰 took tylenol", (Span(7, 14, "tylenol"),))
        assert decorated.gold_spans[0].start - plain.gold_spans[0].start == 2
        assert decorated.text[7:14] == "tylenol"

    def test_emoji_survives_round_trip(self):
        dataset = Dataset("d", (Tweet("t1", "u1", "🤰 took tylenol", (Span(7, 14),)),))
        for fmt in ("jsonl", "tsv"):
            assert parse_dataset(serialize_dataset(dataset, fmt), fmt) == dataset


class TestStratifiedSplit:
    def build(self, n_pos: int, n_neg: int) -> Dataset:
        rows = [
            Tweet(f"p{i}", "u1", f"took tylenol {i}", (Span(5, 12, "tylenol"),))
            for i in range(n_pos)
        ]
        rows += [Tweet(f"n{i}", "u1", f"just tea {i}") for i in range(n_neg)]
        return Dataset("d", tuple(rows))

    def test_ten_tweets_seventy_thirty(self):
        dataset = self.build(4, 6)
        for seed in range(5):
            train, valid = stratified_split(dataset, 0.7, seed)
            assert (len(train), train.positive_count) == (7, 3)
            assert (len(valid), valid.positive_count) == (3, 1)

    def test_parts_partition_the_dataset(self):
        dataset = self.build(4, 6)
        train, valid = stratified_split(dataset, 0.7, 0)
        assert sorted(t.id for t in train) + sorted(t.id for t in valid) != []
        assert {t.id for t in train} | {t.id for t in valid} == {t.id for t in dataset}
        assert {t.id for t in train} & {t.id for t in valid} == set()

    def test_original_order_kept_within_parts(self):
        dataset = self.build(4, 6)
        order = {t.id: i for i, t in enumerate(dataset)}
        train, valid = stratified_split(dataset, 0.7, 3)
        for part in (train, valid):
            positions = [order[t.id] for t in part]
            assert positions == sorted(positions)

    def test_deterministic_and_seed_sensitive(self):
        dataset = self.build(40, 60)
        a1, _ = stratified_split(dataset, 0.7, 1)
        a2, _ = stratified_split(dataset, 0.7, 1)
        b1, _ = stratified_split(dataset, 0.7, 2)
        assert a1 == a2
        assert a1 != b1

    def test_names_derived_from_source(self, tiny_corpus):
        train, valid = stratified_split(tiny_corpus, 0.5, 0)
        assert train.name == "tiny-train"
        assert valid.name == "tiny-valid"

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1, 1.5])
    def test_ratio_bounds(self, tiny_corpus, ratio):
        with pytest.raises(ValueError, match="ratio"):
            stratified_split(tiny_corpus, ratio, 0)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            stratified_split(Dataset("d"), 0.5, 0)

    @settings(max_examples=100)
    @given(datasets(min_size=2, max_size=20), st.floats(0.1, 0.9), st.integers(0, 50))
    def test_ratio_preserved_within_one_tweet(self, dataset, ratio, seed):
        whole = dataset.positive_ratio
        for part in stratified_split(dataset, ratio, seed):
            if len(part):
                assert abs(part.positive_ratio - whole) <= 1 / len(part) + 1e-12


class TestWithSpans:
    def test_replaces_and_recomputes_surfaces(self, tiny_corpus):
        result = with_spans(tiny_corpus, {"t2": [Span(3, 7)]})
        assert result.by_id["t2"].gold_spans == (Span(3, 7, "meds"),)
        assert result.by_id["t1"].gold_spans == ()

    def test_sorts_unordered_input(self, tiny_corpus):
        result = with_spans(tiny_corpus, {"t3": [Span(22, 28), Span(0, 4)]})
        assert [s.start for s in result.by_id["t3"].gold_spans] == [0, 22]

    def test_unknown_id_rejected(self, tiny_corpus):
        with pytest.raises(ValueError, match="unknown"):
            with_spans(tiny_corpus, {"nope": [Span(0, 1)]})
