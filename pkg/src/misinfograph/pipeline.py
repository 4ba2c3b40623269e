"""End-to-end orchestration: score, annotate, cluster, trend, export.

The export document is byte-reproducible: dictionaries are emitted with
sorted keys, arrays in sorted id order, and every random choice in the
run is derived from the single seed recorded in meta.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .classifier.model import ModelParams
from .classifier.training import encode_corpus, predict_scores
from .community import (
    Partition,
    detect,
    project_user_interactions,
    user_key,
)
from .errors import InputError, ModelError
from .propgraph import (
    HashtagNetwork,
    NewsGraph,
    build_hashtag_network,
    build_news_graph,
    node_size,
    read_tweets,
)
from .tokenizer import Vocab

SCHEMA_VERSION = 1

EXPORT_KEYS = ("schema_version", "summary", "nodes", "links",
               "hashtag_nodes", "hashtag_links", "trend", "meta")


@dataclass
class AnnotatedGraph:
    """NewsGraph plus per-node prediction and (optional) community ids."""

    graph: NewsGraph
    labels: dict[str, int] = field(default_factory=dict)
    scores: dict[str, float] = field(default_factory=dict)
    threshold: float = 0.5
    node_communities: dict[str, int] = field(default_factory=dict)
    user_communities: dict[str, int] = field(default_factory=dict)

    def all_tweets(self) -> dict:
        return {**self.graph.originals, **self.graph.retweets}


@dataclass(frozen=True)
class TrendSeries:
    bucket_seconds: int
    threshold: int
    start: int | None
    fake: tuple[int, ...]
    real: tuple[int, ...]
    cumulative_fake: tuple[int, ...]
    cumulative_real: tuple[int, ...]
    viral_at: int | None

    def to_dict(self) -> dict:
        return {
            "bucket_seconds": self.bucket_seconds,
            "threshold": self.threshold,
            "start": self.start,
            "fake": list(self.fake),
            "real": list(self.real),
            "cumulative_fake": list(self.cumulative_fake),
            "cumulative_real": list(self.cumulative_real),
            "viral_at": self.viral_at,
        }


@dataclass(frozen=True)
class GraphSummary:
    node_count: int
    link_count: int
    distinct_users: int
    first_timestamp: int | None
    last_timestamp: int | None
    original_count: int
    retweet_count: int
    unobserved_originals: int
    rejected_clock_skew: int

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "link_count": self.link_count,
            "distinct_users": self.distinct_users,
            "first_timestamp": self.first_timestamp,
            "last_timestamp": self.last_timestamp,
            "original_count": self.original_count,
            "retweet_count": self.retweet_count,
            "unobserved_originals": self.unobserved_originals,
            "rejected_clock_skew": self.rejected_clock_skew,
        }


def annotate(graph: NewsGraph, params: ModelParams, vocab: Vocab,
             threshold: float = 0.5) -> AnnotatedGraph:
    """Score each original once; its retweets inherit label and score."""
    if len(vocab) != params.config.vocab_size:
        raise ModelError(
            f"vocab size {len(vocab)} does not match model vocab_size {params.config.vocab_size}"
        )
    annotated = AnnotatedGraph(graph=graph, threshold=threshold)
    originals = list(graph.originals.values())
    if not originals:
        return annotated

    class _Doc:
        __slots__ = ("text", "label")

        def __init__(self, text):
            self.text = text
            self.label = 0

    ids, mask, _ = encode_corpus([_Doc(t.text) for t in originals], vocab,
                                 params.config.max_seq_len)
    probs = predict_scores(params, ids, mask)
    for tweet, prob in zip(originals, probs):
        annotated.scores[tweet.tweet_id] = float(prob)
        annotated.labels[tweet.tweet_id] = int(prob >= threshold)
    for edge in graph.edges:
        annotated.scores[edge.retweet_id] = annotated.scores[edge.original_id]
        annotated.labels[edge.retweet_id] = annotated.labels[edge.original_id]
    return annotated


def attach_communities(annotated: AnnotatedGraph, partition: Partition,
                       keys: list[str]) -> AnnotatedGraph:
    """Map a user-projection partition onto every tweet node.

    The partition's key list must cover exactly the users present in
    the graph; anything else is an id-space mismatch.
    """
    if len(keys) != len(partition.assignments):
        raise InputError(
            f"partition has {len(partition.assignments)} assignments for {len(keys)} keys"
        )
    user_comm = dict(zip(keys, partition.assignments))
    tweets = annotated.all_tweets()
    graph_users = {user_key(t) for t in tweets.values()}
    missing = graph_users - set(user_comm)
    if missing:
        raise InputError(f"partition does not cover users: {sorted(missing)[:5]}")
    extra = set(user_comm) - graph_users
    if extra:
        raise InputError(f"partition covers unknown users: {sorted(extra)[:5]}")
    annotated.user_communities = {k: int(v) for k, v in user_comm.items()}
    annotated.node_communities = {
        tid: annotated.user_communities[user_key(t)] for tid, t in tweets.items()
    }
    return annotated


def virality_trend(annotated: AnnotatedGraph, bucket_seconds: int = 3600,
                   viral_threshold: int = 1000) -> TrendSeries:
    """Bucket retweets by delay from the earliest original.

    viral_at is the end of the first bucket in which some single
    original's cumulative retweet count reaches the threshold.
    """
    if bucket_seconds < 1:
        raise InputError(f"bucket_seconds must be >= 1, got {bucket_seconds}")
    graph = annotated.graph
    if not graph.originals or not graph.edges:
        return TrendSeries(bucket_seconds, viral_threshold, None, (), (), (), (), None)

    start = min(t.timestamp for t in graph.originals.values())
    buckets: dict[int, list] = {}
    max_bucket = 0
    for edge in graph.edges:
        rt = graph.retweets[edge.retweet_id]
        b = (rt.timestamp - start) // bucket_seconds
        buckets.setdefault(b, []).append(edge)
        max_bucket = max(max_bucket, b)

    n_buckets = max_bucket + 1
    fake = [0] * n_buckets
    real = [0] * n_buckets
    per_original: dict[str, int] = {}
    viral_at = None
    for b in range(n_buckets):
        for edge in buckets.get(b, ()):
            label = annotated.labels.get(edge.original_id)
            if label is None:
                raise InputError(f"original {edge.original_id!r} has no prediction")
            if label == 1:
                fake[b] += 1
            else:
                real[b] += 1
            per_original[edge.original_id] = per_original.get(edge.original_id, 0) + 1
        if viral_at is None and per_original and max(per_original.values()) >= viral_threshold:
            viral_at = start + (b + 1) * bucket_seconds

    cum_fake, cum_real = [], []
    tf = tr = 0
    for b in range(n_buckets):
        tf += fake[b]
        tr += real[b]
        cum_fake.append(tf)
        cum_real.append(tr)
    return TrendSeries(bucket_seconds, viral_threshold, start, tuple(fake), tuple(real),
                       tuple(cum_fake), tuple(cum_real), viral_at)


def hashtag_virality(annotated: AnnotatedGraph, bucket_seconds: int = 3600,
                     viral_threshold: int = 1000) -> dict[str, TrendSeries]:
    """Aggregate trend per hashtag of the original tweet.

    A retweet counts toward every tag its original carries; viral_at
    uses the tag's aggregate cumulative count.
    """
    if bucket_seconds < 1:
        raise InputError(f"bucket_seconds must be >= 1, got {bucket_seconds}")
    graph = annotated.graph
    if not graph.originals or not graph.edges:
        return {}
    start = min(t.timestamp for t in graph.originals.values())

    per_tag: dict[str, dict[int, list]] = {}
    for edge in graph.edges:
        original = graph.originals[edge.original_id]
        rt = graph.retweets[edge.retweet_id]
        b = (rt.timestamp - start) // bucket_seconds
        for tag in original.hashtags:
            per_tag.setdefault(tag, {}).setdefault(b, []).append(edge)

    out = {}
    for tag in sorted(per_tag):
        tag_buckets = per_tag[tag]
        n_buckets = max(tag_buckets) + 1
        fake = [0] * n_buckets
        real = [0] * n_buckets
        viral_at = None
        running = 0
        for b in range(n_buckets):
            for edge in tag_buckets.get(b, ()):
                if annotated.labels.get(edge.original_id) == 1:
                    fake[b] += 1
                else:
                    real[b] += 1
                running += 1
            if viral_at is None and running >= viral_threshold:
                viral_at = start + (b + 1) * bucket_seconds
        cum_fake, cum_real = [], []
        tf = tr = 0
        for b in range(n_buckets):
            tf += fake[b]
            tr += real[b]
            cum_fake.append(tf)
            cum_real.append(tr)
        out[tag] = TrendSeries(bucket_seconds, viral_threshold, start, tuple(fake),
                               tuple(real), tuple(cum_fake), tuple(cum_real), viral_at)
    return out


def summarize(annotated: AnnotatedGraph) -> GraphSummary:
    graph = annotated.graph
    tweets = annotated.all_tweets()
    users = {t.user_id for t in tweets.values() if t.user_id is not None}
    timestamps = [t.timestamp for t in tweets.values()]
    return GraphSummary(
        node_count=graph.node_count,
        link_count=graph.edge_count,
        distinct_users=len(users),
        first_timestamp=min(timestamps) if timestamps else None,
        last_timestamp=max(timestamps) if timestamps else None,
        original_count=len(graph.originals),
        retweet_count=len(graph.retweets),
        unobserved_originals=len(graph.unobserved),
        rejected_clock_skew=graph.rejected_clock_skew,
    )


def export_explorer_json(annotated: AnnotatedGraph, trend: TrendSeries,
                         summary: GraphSummary, net: HashtagNetwork | None = None,
                         meta: dict | None = None) -> dict:
    """Assemble the explorer document (schema_version 1).

    Every node carries its prediction, community, and both size values;
    arrays are sorted so serialization is byte-stable.
    """
    graph = annotated.graph
    out_degrees = {tid: 0 for tid in graph.originals}
    for edge in graph.edges:
        out_degrees[edge.original_id] += 1

    nodes = []
    for tid, tweet in sorted(annotated.all_tweets().items()):
        is_original = tid in graph.originals
        if is_original and tid not in annotated.labels:
            raise InputError(f"original {tid!r} has no prediction; annotate first")
        degree = out_degrees.get(tid, 0)
        nodes.append({
            "id": tid,
            "kind": "original" if is_original else "retweet",
            "user": user_key(tweet),
            "followers": tweet.user_followers,
            "timestamp": tweet.timestamp,
            "label": annotated.labels.get(tid),
            "probability": annotated.scores.get(tid),
            "community": annotated.node_communities.get(tid),
            "out_degree": degree,
            "size_out_degree": node_size(degree, "out_degree"),
            "size_followers": node_size(tweet.user_followers, "followers"),
            "unobserved": tid in graph.unobserved,
        })

    links = [
        {"source": e.original_id, "target": e.retweet_id, "time_weight": e.time_weight}
        for e in sorted(graph.edges, key=lambda e: (e.original_id, e.retweet_id))
    ]

    if net is None:
        net = build_hashtag_network(annotated.all_tweets().values())
    hashtag_nodes = [{"id": tag, "count": count} for tag, count in sorted(net.counts.items())]
    hashtag_links = [
        {"source": a, "target": b, "weight": w}
        for (a, b), w in sorted(net.pair_counts.items())
    ]

    doc = {
        "schema_version": SCHEMA_VERSION,
        "summary": summary.to_dict(),
        "nodes": nodes,
        "links": links,
        "hashtag_nodes": hashtag_nodes,
        "hashtag_links": hashtag_links,
        "trend": trend.to_dict(),
        "meta": dict(meta or {}),
    }
    validate_export(doc)
    return doc


def validate_export(doc) -> None:
    """Reject documents that do not satisfy the version-1 schema."""
    if not isinstance(doc, dict):
        raise InputError("export document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(
            f"unsupported schema_version {version!r}; this build reads version {SCHEMA_VERSION}"
        )
    missing = [k for k in EXPORT_KEYS if k not in doc]
    if missing:
        raise InputError(f"export document missing keys: {missing}")
    node_ids = set()
    for node in doc["nodes"]:
        for key in ("id", "kind", "user", "followers", "timestamp", "label",
                    "probability", "community", "out_degree",
                    "size_out_degree", "size_followers", "unobserved"):
            if key not in node:
                raise InputError(f"node entry missing field {key!r}")
        if node["id"] in node_ids:
            raise InputError(f"duplicate node id {node['id']!r}")
        node_ids.add(node["id"])
    for link in doc["links"]:
        for key in ("source", "target", "time_weight"):
            if key not in link:
                raise InputError(f"link entry missing field {key!r}")
        if link["source"] not in node_ids or link["target"] not in node_ids:
            raise InputError(
                f"link {link['source']!r}->{link['target']!r} references a missing node"
            )
    tag_ids = {h["id"] for h in doc["hashtag_nodes"]}
    for link in doc["hashtag_links"]:
        if link["source"] not in tag_ids or link["target"] not in tag_ids:
            raise InputError("hashtag link references a missing hashtag node")


def export_to_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def save_export(path, doc: dict) -> None:
    Path(path).write_bytes(export_to_bytes(doc))


def load_export(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise InputError(f"export file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    validate_export(doc)
    return doc


def run_pipeline(tweets_path, keywords, params: ModelParams, vocab: Vocab,
                 method: str = "louvain", seed: int = 0, threshold: float = 0.5,
                 viral_threshold: int = 1000, bucket_seconds: int = 3600,
                 any_mode: bool = False, per_hashtag: bool = False) -> dict:
    """Full run from a tweet file to the explorer document."""
    tweets = read_tweets(tweets_path)
    graph = build_news_graph(tweets, keywords, any_mode=any_mode)
    annotated = annotate(graph, params, vocab, threshold)

    ugraph, keys = project_user_interactions(graph)
    if ugraph.n > 0 and ugraph.m > 0:
        partition = detect(ugraph, method, seed)
        attach_communities(annotated, partition, keys)
    else:
        # nothing to cluster: every user its own community
        singleton = Partition(tuple(range(len(keys))), method, 0.0)
        if keys:
            attach_communities(annotated, singleton, keys)

    trend = virality_trend(annotated, bucket_seconds, viral_threshold)
    trend_dict = trend.to_dict()
    if per_hashtag:
        trend_dict["per_hashtag"] = {
            tag: series.to_dict()
            for tag, series in hashtag_virality(annotated, bucket_seconds, viral_threshold).items()
        }
    summary = summarize(annotated)
    net = build_hashtag_network(annotated.all_tweets().values())
    meta = {
        "seed": seed,
        "method": method,
        "keywords": list(keywords),
        "classification_threshold": threshold,
        "viral_threshold": viral_threshold,
        "bucket_seconds": bucket_seconds,
        "generated_by": f"misinfograph {__version__}",
    }
    doc = export_explorer_json(annotated, trend, summary, net, meta)
    if per_hashtag:
        doc["trend"] = trend_dict
    return doc
