import datetime
import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newsbias import corpus
from newsbias.corpus import (
    EVENT_ORDER,
    NARRATIVE_ORDER,
    ArticleRecord,
    EventType,
    FollowerRecord,
    Narrative,
    OutletProfile,
    ParseError,
    Platform,
    Reliability,
)

ARTICLE_HEADER = "outlet_id,platform,date,narrative,event,interactions\n"


def make_article(outlet="o1", narrative=Narrative.PRO, event=EventType.POSITIVE,
                 interactions=0, day=1):
    return ArticleRecord(
        outlet_id=outlet,
        platform=Platform.TWITTER,
        date=datetime.date(2021, 3, day),
        narrative=narrative,
        event=event,
        interactions=interactions,
    )


def make_registry(*outlet_ids, reliability=Reliability.RELIABLE):
    return [OutletProfile(oid, oid.upper(), reliability) for oid in outlet_ids]


class TestParseArticles:
    def test_direct_field_mapping(self):
        stream = io.StringIO(ARTICLE_HEADER + "o1,twitter,2021-03-01,anti,adverse,12\n")
        records = corpus.parse_articles(stream, "csv")
        assert records == [
            ArticleRecord(
                "o1",
                Platform.TWITTER,
                datetime.date(2021, 3, 1),
                Narrative.ANTI,
                EventType.ADVERSE,
                12,
            )
        ]

    def test_empty_stream(self):
        assert corpus.parse_articles(io.StringIO(""), "csv") == []
        assert corpus.parse_articles(io.StringIO(""), "jsonl") == []

    def test_unknown_narrative_label_names_value_and_line(self):
        stream = io.StringIO(
            ARTICLE_HEADER
            + "o1,twitter,2021-03-01,anti,adverse,12\n"
            + "o1,twitter,2021-03-02,provax,adverse,1\n"
        )
        with pytest.raises(ParseError, match=r"unknown narrative label 'provax' at line 3"):
            corpus.parse_articles(stream, "csv")

    def test_unknown_platform_rejected(self):
        stream = io.StringIO(ARTICLE_HEADER + "o1,myspace,2021-03-01,anti,adverse,1\n")
        with pytest.raises(ParseError, match=r"unknown platform 'myspace' at line 2"):
            corpus.parse_articles(stream, "csv")

    def test_malformed_row_names_line(self):
        stream = io.StringIO(ARTICLE_HEADER + "o1,twitter,2021-03-01,anti,adverse\n")
        with pytest.raises(ParseError, match=r"expected 6 fields, got 5 at line 2"):
            corpus.parse_articles(stream, "csv")

    def test_bad_date_and_negative_interactions(self):
        bad_date = io.StringIO(ARTICLE_HEADER + "o1,twitter,03/01/2021,anti,adverse,1\n")
        with pytest.raises(ParseError, match="malformed date"):
            corpus.parse_articles(bad_date, "csv")
        negative = io.StringIO(ARTICLE_HEADER + "o1,twitter,2021-03-01,anti,adverse,-2\n")
        with pytest.raises(ParseError, match="interactions"):
            corpus.parse_articles(negative, "csv")

    def test_bad_header(self):
        with pytest.raises(ParseError, match="bad header"):
            corpus.parse_articles(io.StringIO("outlet,platform\n"), "csv")

    def test_jsonl_round(self):
        line = (
            '{"outlet_id": "o2", "platform": "youtube", "date": "2020-12-31",'
            ' "narrative": "neutral", "event": "positive", "interactions": 7}\n'
        )
        records = corpus.parse_articles(io.StringIO(line), "jsonl")
        assert records[0].platform is Platform.YOUTUBE
        assert records[0].interactions == 7

    def test_jsonl_missing_and_unexpected_fields(self):
        with pytest.raises(ParseError, match="missing field 'event'"):
            corpus.parse_articles(
                io.StringIO('{"outlet_id": "o", "platform": "twitter", "date": "2020-01-01", "narrative": "pro", "interactions": 0}\n'),
                "jsonl",
            )
        with pytest.raises(ParseError, match="unexpected field 'extra'"):
            corpus.parse_articles(
                io.StringIO('{"outlet_id": "o", "platform": "twitter", "date": "2020-01-01", "narrative": "pro", "event": "positive", "interactions": 0, "extra": 1}\n'),
                "jsonl",
            )

    def test_jsonl_bool_interactions_rejected(self):
        with pytest.raises(ParseError, match="invalid interactions"):
            corpus.parse_articles(
                io.StringIO('{"outlet_id": "o", "platform": "twitter", "date": "2020-01-01", "narrative": "pro", "event": "positive", "interactions": true}\n'),
                "jsonl",
            )

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="unknown format"):
            corpus.parse_articles(io.StringIO(""), "xml")

    def test_row_order_preserved(self):
        rows = "".join(
            f"o{i},twitter,2021-01-0{i},pro,positive,{i}\n" for i in range(1, 6)
        )
        records = corpus.parse_articles(io.StringIO(ARTICLE_HEADER + rows), "csv")
        assert [r.outlet_id for r in records] == [f"o{i}" for i in range(1, 6)]


class TestParseRetweets:
    def test_duplicates_summed(self):
        stream = io.StringIO("user_id,outlet_id,count\nu1,o1,2\nu1,o1,3\n")
        records = corpus.parse_retweets(stream, "csv")
        assert len(records) == 1
        assert records[0].count == 5

    def test_empty(self):
        assert corpus.parse_retweets(io.StringIO(""), "csv") == []

    def test_total_preserved_under_dedup(self):
        rng = np.random.default_rng(0)
        rows = [
            (f"u{rng.integers(3)}", f"o{rng.integers(2)}", int(rng.integers(1, 9)))
            for _ in range(10)
        ]
        text = "user_id,outlet_id,count\n" + "".join(
            f"{u},{o},{c}\n" for u, o, c in rows
        )
        records = corpus.parse_retweets(io.StringIO(text), "csv")
        # independent tally
        expected = Counter()
        for u, o, c in rows:
            expected[(u, o)] += c
        assert sum(r.count for r in records) == sum(c for _, _, c in rows)
        assert {(r.user_id, r.outlet_id): r.count for r in records} == dict(expected)

    def test_zero_count_rejected(self):
        with pytest.raises(ParseError, match="count must be >= 1"):
            corpus.parse_retweets(io.StringIO("user_id,outlet_id,count\nu,o,0\n"), "csv")


class TestParseOutletsFollowers:
    def test_outlets(self):
        text = "outlet_id,name,reliability,kind\no1,Daily One,reliable,newspaper\no2,Chan,questionable,\n"
        records = corpus.parse_outlets(io.StringIO(text), "csv")
        assert records[0].kind is corpus.OutletKind.NEWSPAPER
        assert records[1].kind is None
        assert records[1].reliability is Reliability.QUESTIONABLE

    def test_duplicate_outlet_rejected(self):
        text = "outlet_id,name,reliability,kind\no1,A,reliable,\no1,B,reliable,\n"
        with pytest.raises(ValueError, match="duplicate outlet_id"):
            corpus.parse_outlets(io.StringIO(text), "csv")

    def test_followers(self):
        text = (
            "outlet_id,platform,period_start,period_end,followers\n"
            "o1,facebook,2020-01-01,2020-06-30,1000\n"
        )
        rec = corpus.parse_followers(io.StringIO(text), "csv")[0]
        assert rec.followers == 1000
        bad = (
            "outlet_id,platform,period_start,period_end,followers\n"
            "o1,facebook,2020-06-30,2020-01-01,1000\n"
        )
        with pytest.raises(ParseError, match="period_start"):
            corpus.parse_followers(io.StringIO(bad), "csv")


class TestAggregateCounts:
    def test_single_cell(self):
        articles = [make_article() for _ in range(3)]
        tensor = corpus.aggregate_counts(articles, make_registry("o1"))
        expected = np.zeros((1, 3, 3), dtype=np.int64)
        expected[0, 2, 2] = 3  # pro narrative, positive event
        assert (tensor.counts == expected).all()

    def test_two_outlets(self):
        articles = [make_article("o1"), make_article("o2")]
        tensor = corpus.aggregate_counts(articles, make_registry("o1", "o2"))
        assert tensor.total == 2
        assert (tensor.counts.sum(axis=(1, 2)) == [1, 1]).all()

    def test_random_corpus_matches_independent_tally(self):
        rng = np.random.default_rng(42)
        registry = make_registry(*(f"o{i}" for i in range(5)))
        articles = [
            make_article(
                outlet=f"o{rng.integers(5)}",
                narrative=NARRATIVE_ORDER[rng.integers(3)],
                event=EVENT_ORDER[rng.integers(3)],
            )
            for _ in range(1000)
        ]
        tensor = corpus.aggregate_counts(articles, registry)
        assert tensor.total == 1000
        tally = Counter((a.outlet_id, a.narrative, a.event) for a in articles)
        for i, outlet in enumerate(tensor.outlets):
            for j, narrative in enumerate(NARRATIVE_ORDER):
                for k, event in enumerate(EVENT_ORDER):
                    assert tensor.counts[i, j, k] == tally[(outlet, narrative, event)]

    def test_unregistered_outlet(self):
        with pytest.raises(ValueError, match="unregistered outlet 'ghost'"):
            corpus.aggregate_counts([make_article("ghost")], make_registry("o1"))

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        registry = make_registry("a", "b", "c")
        articles = [
            make_article(
                outlet=["a", "b", "c"][rng.integers(3)],
                narrative=NARRATIVE_ORDER[rng.integers(3)],
                event=EVENT_ORDER[rng.integers(3)],
            )
            for _ in range(60)
        ]
        tensor = corpus.aggregate_counts(articles, registry)
        permuted = corpus.aggregate_counts(articles, registry[::-1])
        assert permuted.outlets == tuple(reversed(tensor.outlets))
        assert (permuted.counts == tensor.counts[::-1]).all()

    @given(
        st.lists(
            st.tuples(st.integers(0, 3), st.integers(0, 2), st.integers(0, 2)),
            max_size=200,
        )
    )
    @settings(deadline=None, max_examples=50)
    def test_conservation_property(self, triples):
        registry = make_registry(*(f"o{i}" for i in range(4)))
        articles = [
            make_article(
                outlet=f"o{i}",
                narrative=NARRATIVE_ORDER[j],
                event=EVENT_ORDER[k],
            )
            for i, j, k in triples
        ]
        tensor = corpus.aggregate_counts(articles, registry)
        assert tensor.total == len(articles)


class TestBreakdown:
    def test_single_reliable_outlet(self):
        articles = [make_article(interactions=i) for i in range(5)]
        table = corpus.dataset_breakdown(articles, make_registry("o1"))
        assert table.reliable.sources == 1
        assert table.reliable.contents == 5
        assert table.reliable.interactions == 10
        assert table.reliable.contents_pct == 100.0
        assert table.questionable.sources == 0
        assert table.questionable.contents == 0

    def test_no_articles(self):
        with pytest.raises(ValueError, match="no articles"):
            corpus.dataset_breakdown([], make_registry("o1"))

    def test_display_rounding_of_published_shares(self):
        # 44,547 of 353,530 contents -> 12.6%; 161 of 682 sources -> 23.6%
        assert f"{100 * 44547 / 353530:.1f}" == "12.6"
        assert f"{100 * 161 / 682:.1f}" == "23.6"


class TestFilterAndRoundTrips:
    def test_filter_window(self):
        articles = [make_article(day=d) for d in (1, 10, 20)]
        kept = corpus.filter_articles(
            articles, datetime.date(2021, 3, 5), datetime.date(2021, 3, 15)
        )
        assert [a.date.day for a in kept] == [10]
        assert corpus.filter_articles(articles) == articles

    def test_tensor_csv_round_trip(self):
        rng = np.random.default_rng(1)
        counts = rng.integers(0, 50, size=(4, 3, 3))
        tensor = corpus.CountTensor(tuple(f"o{i}" for i in range(4)), counts)
        buf = io.StringIO()
        corpus.write_count_tensor(tensor, buf)
        buf.seek(0)
        back = corpus.read_count_tensor(buf)
        assert back.outlets == tensor.outlets
        assert (back.counts == tensor.counts).all()

    def test_article_csv_round_trip(self):
        articles = [
            make_article("o1", Narrative.ANTI, EventType.NEUTRAL, 3, day=2),
            make_article("o2", Narrative.NEUTRAL, EventType.ADVERSE, 0, day=9),
        ]
        buf = io.StringIO()
        corpus.write_articles(articles, buf)
        buf.seek(0)
        assert corpus.parse_articles(buf, "csv") == articles

    def test_follower_csv_round_trip(self):
        records = [
            FollowerRecord(
                "o1",
                Platform.FACEBOOK,
                datetime.date(2020, 1, 1),
                datetime.date(2020, 12, 31),
                12345,
            )
        ]
        buf = io.StringIO()
        corpus.write_followers(records, buf)
        buf.seek(0)
        assert corpus.parse_followers(buf, "csv") == records


class TestRecordInvariants:
    def test_negative_interactions(self):
        with pytest.raises(ValueError):
            make_article(interactions=-1)

    def test_retweet_count_positive(self):
        with pytest.raises(ValueError):
            corpus.RetweetRecord("u", "o", 0)

    def test_tensor_shape_checked(self):
        with pytest.raises(ValueError, match="shape"):
            corpus.CountTensor(("o1",), np.zeros((2, 3, 3), dtype=int))
        with pytest.raises(ValueError, match=">= 0"):
            corpus.CountTensor(("o1",), np.full((1, 3, 3), -1))
