"""Annotation, virality trends, and the export document."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misinfograph.classifier.model import ModelConfig, init_params
from misinfograph.community import louvain, project_user_interactions
from misinfograph.errors import InputError, ModelError
from misinfograph.pipeline import (
    SCHEMA_VERSION,
    AnnotatedGraph,
    annotate,
    attach_communities,
    export_explorer_json,
    export_to_bytes,
    hashtag_virality,
    load_export,
    run_pipeline,
    save_export,
    summarize,
    validate_export,
    virality_trend,
)
from misinfograph.propgraph import Tweet, build_news_graph
from misinfograph.tokenizer import RESERVED_TOKENS, Vocab


def mk(tid, ts, text="election news", user="u", followers=5, retweet_of=None, tags=()):
    return Tweet(tweet_id=tid, user_id=user, user_followers=followers,
                 timestamp=ts, text=text, hashtags=tuple(tags), retweet_of=retweet_of)


def model_fixture():
    vocab = Vocab(list(RESERVED_TOKENS)
                  + ["election", "news", "hoax", "report"]
                  + list("abcdefghijklmnopqrstuvwxyz")
                  + ["##" + c for c in "abcdefghijklmnopqrstuvwxyz"])
    cfg = ModelConfig(num_layers=1, hidden_dim=8, num_heads=2, ffn_dim=16,
                      max_seq_len=16, vocab_size=len(vocab), dropout_rate=0.0)
    return init_params(cfg, seed=0), vocab


def star_graph(n_retweets=4, orig_ts=0, spacing=10):
    tweets = [mk("o1", orig_ts, tags=("vote",))]
    for i in range(n_retweets):
        tweets.append(mk(f"r{i}", orig_ts + (i + 1) * spacing,
                         user=f"u{i}", retweet_of="o1"))
    return build_news_graph(tweets, ["election"])


def forced_annotation(graph, label_by_original):
    """AnnotatedGraph with chosen labels, bypassing the model."""
    ann = AnnotatedGraph(graph=graph)
    for oid, label in label_by_original.items():
        ann.labels[oid] = label
        ann.scores[oid] = 0.9 if label else 0.1
    for e in graph.edges:
        ann.labels[e.retweet_id] = ann.labels[e.original_id]
        ann.scores[e.retweet_id] = ann.scores[e.original_id]
    return ann


class TestAnnotate:
    def test_retweets_inherit_original_prediction(self):
        params, vocab = model_fixture()
        g = star_graph(3)
        ann = annotate(g, params, vocab)
        for e in g.edges:
            assert ann.labels[e.retweet_id] == ann.labels[e.original_id]
            assert ann.scores[e.retweet_id] == ann.scores[e.original_id]

    def test_topology_untouched(self):
        params, vocab = model_fixture()
        g = star_graph(3)
        before = (set(g.originals), set(g.retweets), g.edges)
        annotate(g, params, vocab)
        assert (set(g.originals), set(g.retweets), g.edges) == before

    def test_threshold_extremes(self):
        params, vocab = model_fixture()
        g = star_graph(2)
        assert set(annotate(g, params, vocab, threshold=0.0).labels.values()) == {1}
        assert set(annotate(g, params, vocab, threshold=1.0).labels.values()) == {0}

    def test_vocab_mismatch_rejected(self):
        params, _ = model_fixture()
        wrong = Vocab(list(RESERVED_TOKENS) + ["x"])
        with pytest.raises(ModelError, match="vocab"):
            annotate(star_graph(1), params, wrong)

    def test_empty_graph_ok(self):
        params, vocab = model_fixture()
        g = build_news_graph([], ["election"])
        ann = annotate(g, params, vocab)
        assert ann.labels == {}


class TestAttachCommunities:
    def test_exact_cover_maps_every_node(self):
        g = star_graph(3)
        ann = forced_annotation(g, {"o1": 1})
        ug, keys = project_user_interactions(g)
        part = louvain(ug, seed=0)
        attach_communities(ann, part, keys)
        for tid in ann.all_tweets():
            assert tid in ann.node_communities

    def test_missing_users_rejected(self):
        g = star_graph(2)
        ann = forced_annotation(g, {"o1": 1})
        ug, keys = project_user_interactions(g)
        part = louvain(ug, seed=0)
        with pytest.raises(InputError, match="does not cover"):
            attach_communities(ann, part, keys[:-1] + ["stranger"])

    def test_unknown_users_rejected(self):
        g = star_graph(2)
        ann = forced_annotation(g, {"o1": 1})
        ug, keys = project_user_interactions(g)
        part = louvain(ug, seed=0)
        padded = Partition(assignments=tuple(part.assignments) + (0,),
                           method=part.method, quality=part.quality)
        with pytest.raises(InputError, match="unknown users"):
            attach_communities(ann, padded, keys + ["stranger"])

    def test_length_mismatch_rejected(self):
        g = star_graph(2)
        ann = forced_annotation(g, {"o1": 1})
        ug, keys = project_user_interactions(g)
        part = louvain(ug, seed=0)
        with pytest.raises(InputError, match="assignments"):
            attach_communities(ann, part, keys + ["extra"])


from misinfograph.community import Partition  # noqa: E402  (used above)


class TestVirality:
    def test_bucketing_and_conservation(self):
        # retweets at +10..+40s with 15s buckets from the original
        g = star_graph(4, orig_ts=100, spacing=10)
        ann = forced_annotation(g, {"o1": 1})
        trend = virality_trend(ann, bucket_seconds=15, viral_threshold=1000)
        assert trend.start == 100
        assert sum(trend.fake) + sum(trend.real) == g.edge_count
        # delays 10, 20, 30, 40 under 15s buckets land in 0, 1, 2, 2
        assert trend.fake == (1, 1, 2)
        assert trend.viral_at is None

    def test_cumulative_is_prefix_sum(self):
        g = star_graph(6, spacing=7)
        ann = forced_annotation(g, {"o1": 0})
        trend = virality_trend(ann, bucket_seconds=10)
        running = 0
        for f, c in zip(trend.real, trend.cumulative_real):
            running += f
            assert c == running
        assert trend.cumulative_fake[-1] == 0

    def test_fake_real_split_by_label(self):
        tweets = [
            mk("fake1", 0, tags=()),
            mk("real1", 0),
            mk("ra", 5, user="x", retweet_of="fake1"),
            mk("rb", 6, user="y", retweet_of="fake1"),
            mk("rc", 7, user="z", retweet_of="real1"),
        ]
        g = build_news_graph(tweets, ["election"])
        ann = forced_annotation(g, {"fake1": 1, "real1": 0})
        trend = virality_trend(ann, bucket_seconds=60)
        assert trend.fake == (2,)
        assert trend.real == (1,)

    def test_viral_at_exact_bucket(self):
        # 1200 retweets of one original, 100 per 60s bucket; threshold
        # 1000 is reached inside bucket 9 (ts 540..599)
        tweets = [mk("big", 0)]
        for i in range(1200):
            tweets.append(mk(f"r{i}", (i * 6) // 10, user=f"u{i}", retweet_of="big"))
        g = build_news_graph(tweets, ["election"])
        ann = forced_annotation(g, {"big": 1})
        trend = virality_trend(ann, bucket_seconds=60, viral_threshold=1000)
        assert trend.viral_at == 600  # end of the bucket covering 540..599

    def test_below_threshold_never_viral(self):
        tweets = [mk("big", 0)]
        for i in range(999):
            tweets.append(mk(f"r{i}", i, user=f"u{i}", retweet_of="big"))
        g = build_news_graph(tweets, ["election"])
        ann = forced_annotation(g, {"big": 1})
        trend = virality_trend(ann, bucket_seconds=60, viral_threshold=1000)
        assert trend.viral_at is None
        assert trend.cumulative_fake[-1] == 999

    def test_per_original_not_pooled(self):
        # two originals with 3 retweets each never cross a threshold of 5,
        # even though the pooled count does
        tweets = [mk("a", 0), mk("b", 0)]
        for i in range(3):
            tweets.append(mk(f"ra{i}", 1 + i, user=f"x{i}", retweet_of="a"))
            tweets.append(mk(f"rb{i}", 1 + i, user=f"y{i}", retweet_of="b"))
        g = build_news_graph(tweets, ["election"])
        ann = forced_annotation(g, {"a": 1, "b": 0})
        trend = virality_trend(ann, bucket_seconds=10, viral_threshold=5)
        assert trend.viral_at is None

    @given(st.integers(min_value=1, max_value=40), st.integers(1, 8),
           st.integers(0, 3))
    @settings(max_examples=60, deadline=None)
    def test_threshold_monotonicity(self, n_retweets, bucket, seed):
        import random
        rnd = random.Random(seed)
        tweets = [mk("o", 0)]
        for i in range(n_retweets):
            tweets.append(mk(f"r{i}", rnd.randint(0, 50), user=f"u{i}", retweet_of="o"))
        g = build_news_graph(tweets, ["election"])
        ann = forced_annotation(g, {"o": 1})
        prev = None
        for threshold in range(1, n_retweets + 2):
            t = virality_trend(ann, bucket_seconds=bucket, viral_threshold=threshold)
            if prev is not None and prev.viral_at is None:
                assert t.viral_at is None
            if prev is not None and t.viral_at is not None:
                assert prev.viral_at is not None
                assert prev.viral_at <= t.viral_at
            prev = t

    def test_empty_graph_empty_trend(self):
        g = build_news_graph([], ["election"])
        trend = virality_trend(AnnotatedGraph(graph=g))
        assert trend.start is None
        assert trend.fake == ()

    def test_bad_bucket_rejected(self):
        g = star_graph(1)
        with pytest.raises(InputError, match="bucket"):
            virality_trend(forced_annotation(g, {"o1": 1}), bucket_seconds=0)

    def test_unannotated_original_rejected(self):
        g = star_graph(1)
        with pytest.raises(InputError, match="prediction"):
            virality_trend(AnnotatedGraph(graph=g))


class TestHashtagVirality:
    def test_retweet_counts_toward_each_original_tag(self):
        tweets = [
            mk("o1", 0, tags=("vote", "news")),
            mk("r1", 5, user="x", retweet_of="o1"),
            mk("r2", 6, user="y", retweet_of="o1"),
        ]
        g = build_news_graph(tweets, ["election"])
        ann = forced_annotation(g, {"o1": 1})
        trends = hashtag_virality(ann, bucket_seconds=10, viral_threshold=2)
        assert set(trends) == {"vote", "news"}
        for t in trends.values():
            assert sum(t.fake) == 2
            assert t.viral_at == 10

    def test_untagged_original_contributes_nothing(self):
        g = star_graph(3)  # o1 carries tag "vote"... star_graph sets tags=("vote",)
        ann = forced_annotation(g, {"o1": 0})
        trends = hashtag_virality(ann, bucket_seconds=10)
        assert set(trends) == {"vote"}
        assert sum(trends["vote"].real) == 3


class TestSummarize:
    def test_counts(self):
        tweets = [
            mk("o1", 50, user="alice"),
            mk("r1", 60, user="bob", retweet_of="o1"),
            mk("r2", 70, user="alice", retweet_of="o1"),
            mk("gr", 80, user="carol", retweet_of="ghost"),
            mk("skew", 40, user="dan", retweet_of="o1"),
        ]
        g = build_news_graph(tweets, ["election"])
        s = summarize(forced_annotation(g, {"o1": 1, "ghost": 1}))
        assert s.original_count == 2
        assert s.retweet_count == 3
        assert s.node_count == 5
        assert s.link_count == 3
        assert s.unobserved_originals == 1
        assert s.rejected_clock_skew == 1
        # ghost placeholder has no user; distinct real users only
        assert s.distinct_users == 3
        assert s.first_timestamp == 50
        assert s.last_timestamp == 80


class TestExport:
    def full_doc(self):
        tweets = [
            mk("o1", 0, user="alice", followers=100, tags=("vote",)),
            mk("o2", 10, user="bob", followers=25),
            mk("r1", 30, user="carol", retweet_of="o1", tags=("vote",)),
            mk("r2", 45, user="dave", retweet_of="o1"),
            mk("r3", 50, user="erin", retweet_of="o2"),
        ]
        g = build_news_graph(tweets, ["election"])
        ann = forced_annotation(g, {"o1": 1, "o2": 0})
        ug, keys = project_user_interactions(g)
        attach_communities(ann, louvain(ug, seed=0), keys)
        trend = virality_trend(ann, bucket_seconds=30)
        return export_explorer_json(ann, trend, summarize(ann), meta={"seed": 0})

    def test_document_shape(self):
        doc = self.full_doc()
        assert doc["schema_version"] == SCHEMA_VERSION
        assert [n["id"] for n in doc["nodes"]] == ["o1", "o2", "r1", "r2", "r3"]
        kinds = {n["id"]: n["kind"] for n in doc["nodes"]}
        assert kinds["o1"] == "original" and kinds["r1"] == "retweet"
        assert doc["links"][0] == {"source": "o1", "target": "r1", "time_weight": 30}

    def test_node_annotations_complete(self):
        doc = self.full_doc()
        by_id = {n["id"]: n for n in doc["nodes"]}
        o1 = by_id["o1"]
        assert o1["label"] == 1
        assert o1["out_degree"] == 2
        assert o1["size_out_degree"] == pytest.approx(2 ** 0.5)
        assert o1["size_followers"] == pytest.approx(10.0)
        assert o1["community"] is not None
        assert by_id["r1"]["label"] == 1
        assert by_id["r3"]["label"] == 0
        assert not o1["unobserved"]

    def test_validates_itself(self):
        validate_export(self.full_doc())

    def test_round_trip_bytes_stable(self, tmp_path):
        doc = self.full_doc()
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_export(p1, doc)
        save_export(p2, doc)
        assert p1.read_bytes() == p2.read_bytes()
        assert load_export(p1) == doc

    def test_export_bytes_end_with_newline(self):
        assert export_to_bytes(self.full_doc()).endswith(b"\n")


class TestValidation:
    def base(self):
        return TestExport().full_doc()

    def test_future_schema_rejected(self):
        doc = self.base()
        doc["schema_version"] = 2
        with pytest.raises(InputError, match="schema_version 2"):
            validate_export(doc)

    def test_missing_key_rejected(self):
        doc = self.base()
        del doc["trend"]
        with pytest.raises(InputError, match="trend"):
            validate_export(doc)

    def test_duplicate_node_id_rejected(self):
        doc = self.base()
        doc["nodes"].append(dict(doc["nodes"][0]))
        with pytest.raises(InputError, match="duplicate"):
            validate_export(doc)

    def test_dangling_link_rejected(self):
        doc = self.base()
        doc["links"].append({"source": "o1", "target": "never", "time_weight": 1})
        with pytest.raises(InputError, match="never"):
            validate_export(doc)

    def test_dangling_hashtag_link_rejected(self):
        doc = self.base()
        doc["hashtag_links"].append({"source": "vote", "target": "ghost", "weight": 1})
        with pytest.raises(InputError):
            validate_export(doc)

    def test_node_missing_field_rejected(self):
        doc = self.base()
        del doc["nodes"][0]["out_degree"]
        with pytest.raises(InputError, match="out_degree"):
            validate_export(doc)


class TestRunPipeline:
    def write_fixture(self, tmp_path):
        lines = []

        def line(tid, sec, text, user, retweet_of=None, tags=()):
            obj = {"id": tid, "user_id": user, "user_followers": 10,
                   "created_at": f"2020-10-26T08:{sec // 60:02d}:{sec % 60:02d}Z",
                   "text": text, "hashtags": list(tags)}
            if retweet_of:
                obj["retweeted_status_id"] = retweet_of
            lines.append(json.dumps(obj))

        line("o1", 0, "election news hoax", "alice", tags=("vote",))
        line("o2", 30, "election report", "bob")
        for i in range(4):
            line(f"ra{i}", 60 + i, "rt election news hoax", f"amp{i}", retweet_of="o1")
        line("rb0", 90, "rt election report", "carol", retweet_of="o2")
        path = tmp_path / "tweets.ndjson"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_end_to_end_and_deterministic(self, tmp_path):
        params, vocab = model_fixture()
        path = self.write_fixture(tmp_path)
        doc1 = run_pipeline(path, ["election"], params, vocab, seed=3)
        doc2 = run_pipeline(path, ["election"], params, vocab, seed=3)
        assert export_to_bytes(doc1) == export_to_bytes(doc2)
        assert doc1["summary"]["node_count"] == 7
        assert doc1["meta"]["seed"] == 3
        assert doc1["meta"]["method"] == "louvain"
        assert doc1["meta"]["keywords"] == ["election"]
        communities = {n["community"] for n in doc1["nodes"]}
        assert None not in communities

    def test_infomap_method(self, tmp_path):
        params, vocab = model_fixture()
        path = self.write_fixture(tmp_path)
        doc = run_pipeline(path, ["election"], params, vocab, method="infomap")
        assert doc["meta"]["method"] == "infomap"
        validate_export(doc)

    def test_per_hashtag_flag(self, tmp_path):
        params, vocab = model_fixture()
        path = self.write_fixture(tmp_path)
        doc = run_pipeline(path, ["election"], params, vocab, per_hashtag=True)
        assert "per_hashtag" in doc["trend"]
        assert "vote" in doc["trend"]["per_hashtag"]

    def test_no_matching_tweets_still_valid(self, tmp_path):
        params, vocab = model_fixture()
        path = self.write_fixture(tmp_path)
        doc = run_pipeline(path, ["nonexistentword"], params, vocab)
        assert doc["nodes"] == []
        validate_export(doc)
