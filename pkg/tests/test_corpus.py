import logging

import pytest
from hypothesis import given, settings, strategies as st

from trendmine.corpus import (EngagementMetrics, Platform, impute_missing, ingest,
                              yearly_counts)
from trendmine.errors import DataError

from conftest import make_post, record, write_jsonl


def build_corpus(tmp_path, records, name="posts.jsonl"):
    return ingest(write_jsonl(tmp_path / name, records), "jsonl")


class TestIngest:
    def test_three_valid_lines(self, tmp_path):
        corpus = build_corpus(tmp_path, [record(f"p{i}") for i in range(3)])
        assert len(corpus) == 3
        assert corpus.provenance.reject_count == 0

    def test_empty_file_warns(self, tmp_path, caplog):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with caplog.at_level(logging.WARNING):
            corpus = ingest(path, "jsonl")
        assert len(corpus) == 0
        assert "empty" in caplog.text

    def test_two_of_ten_missing_id(self, tmp_path):
        records = [record(f"p{i}") for i in range(10)]
        del records[2]["id"]
        records[6]["id"] = ""
        corpus = build_corpus(tmp_path, records)
        assert len(corpus) == 8
        assert corpus.provenance.reject_count == 2
        assert [line for line, _ in corpus.provenance.reject_samples] == [3, 7]

    def test_majority_malformed_is_fatal(self, tmp_path):
        records = [record("p1"), {"nope": 1}, {"nope": 2}]
        with pytest.raises(DataError, match="malformed"):
            build_corpus(tmp_path, records)

    def test_missing_file_is_fatal(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            ingest(tmp_path / "nope.jsonl", "jsonl")

    def test_duplicate_id_rejected(self, tmp_path):
        corpus = build_corpus(tmp_path, [record("p1"), record("p1")])
        assert len(corpus) == 1
        assert "duplicate" in corpus.provenance.reject_samples[0][1]

    def test_timestamp_outside_range_rejected(self, tmp_path):
        corpus = build_corpus(tmp_path, [record("p1"), record("p2", year=2017)])
        assert len(corpus) == 1
        assert "range" in corpus.provenance.reject_samples[0][1]

    def test_negative_engagement_rejected(self, tmp_path):
        corpus = build_corpus(tmp_path, [record("p1", likes=-3)])
        assert len(corpus) == 0

    def test_csv_roundtrip(self, tmp_path):
        path = tmp_path / "posts.csv"
        path.write_text(
            "id,platform,timestamp,text,geo,hashtags,likes,comments,shares,saves,lang\n"
            'p1,X,2022-06-01T10:00:00Z,hello,Saudi Arabia,ksa|solar,5,1,,0,en\n',
            encoding="utf-8")
        corpus = ingest(path, "csv")
        post = corpus.posts[0]
        assert post.hashtags == ("ksa", "solar")
        assert post.engagement.likes == 5
        assert post.engagement.shares is None
        assert post.geo == "Saudi Arabia"

    def test_deterministic(self, tmp_path):
        records = [record(f"p{i}") for i in range(5)] + [{"bad": 1}]
        a = build_corpus(tmp_path, records, "a.jsonl")
        b = build_corpus(tmp_path, records, "b.jsonl")
        assert a.posts == b.posts
        assert a.provenance.reject_count == b.provenance.reject_count
        assert a.counts == b.counts

    def test_platform_aliases(self, tmp_path):
        corpus = build_corpus(tmp_path, [record("p1", platform="twitter"),
                                         record("p2", platform="weird")])
        assert corpus.posts[0].platform is Platform.X
        assert corpus.posts[1].platform is Platform.OTHER


def corpus_with_likes(tmp_path, likes_values, platform="X"):
    records = [record(f"p{i}", likes=v, platform=platform)
               for i, v in enumerate(likes_values)]
    return build_corpus(tmp_path, records)


class TestImpute:
    def test_unique_mode(self, tmp_path):
        corpus = corpus_with_likes(tmp_path, [3, 3, 7, None])
        out = impute_missing(corpus, {"likes"})
        assert out.posts[3].engagement.likes == 3

    def test_tie_breaks_to_smallest(self, tmp_path):
        corpus = corpus_with_likes(tmp_path, [2, 2, 5, 5, None])
        out = impute_missing(corpus, {"likes"})
        assert out.posts[4].engagement.likes == 2

    def test_geo_stays_absent_when_never_observed(self, tmp_path):
        corpus = build_corpus(tmp_path, [record("p1"), record("p2")])
        out = impute_missing(corpus, {"geo"})
        assert all(p.geo is None for p in out.posts)

    def test_engagement_defaults_to_zero_when_never_observed(self, tmp_path):
        records = [record("p1", likes=None, comments=None, shares=None, saves=None)]
        corpus = build_corpus(tmp_path, records)
        out = impute_missing(corpus, {"likes", "comments", "shares", "saves"})
        assert out.posts[0].engagement == EngagementMetrics(0, 0, 0, 0)

    def test_per_platform_mode_before_global(self, tmp_path):
        records = [record("p1", platform="X", likes=10),
                   record("p2", platform="X", likes=10),
                   record("p3", platform="Reddit", likes=2),
                   record("p4", platform="Reddit", likes=None),
                   record("p5", platform="Facebook", likes=None)]
        corpus = build_corpus(tmp_path, records)
        out = impute_missing(corpus, {"likes"})
        by_id = {p.id: p for p in out.posts}
        assert by_id["p4"].engagement.likes == 2     # Reddit mode
        assert by_id["p5"].engagement.likes == 10    # global mode (no Facebook values)

    def test_never_changes_present_values_or_post_count(self, tmp_path):
        corpus = corpus_with_likes(tmp_path, [4, 9, None, 4])
        out = impute_missing(corpus, {"likes"})
        assert len(out) == len(corpus)
        for before, after in zip(corpus.posts, out.posts):
            if before.engagement and before.engagement.likes is not None:
                assert after.engagement.likes == before.engagement.likes

    def test_no_selected_field_missing_afterwards(self, tmp_path):
        records = [record(f"p{i}", likes=None if i % 3 == 0 else i,
                          saves=None if i % 2 == 0 else 1) for i in range(9)]
        corpus = build_corpus(tmp_path, records)
        out = impute_missing(corpus, {"likes", "saves"})
        for p in out.posts:
            assert p.engagement.likes is not None
            assert p.engagement.saves is not None

    def test_empty_corpus_fatal(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text("")
        with pytest.raises(DataError):
            impute_missing(ingest(path, "jsonl"), {"likes"})

    def test_counts_reported(self, tmp_path):
        corpus = corpus_with_likes(tmp_path, [1, None, None])
        out = impute_missing(corpus, {"likes"})
        assert out.provenance.imputed_counts == {"likes": 2}


class TestYearlyCounts:
    def test_single_post(self, tmp_path):
        corpus = build_corpus(tmp_path, [record("p1", year=2022)])
        assert yearly_counts(corpus) == {2022: 1}

    def test_empty(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text("")
        assert yearly_counts(ingest(path, "jsonl")) == {}

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(min_value=2018, max_value=2024), min_size=0, max_size=40))
    def test_counts_sum_to_corpus_size(self, years, tmp_path_factory):
        tmp = tmp_path_factory.mktemp("yc")
        records = [record(f"p{i}", year=y) for i, y in enumerate(years)]
        corpus = build_corpus(tmp, records)
        assert sum(yearly_counts(corpus).values()) == len(corpus)
