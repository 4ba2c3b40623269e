"""Tweet propagation graphs and hashtag co-occurrence networks.

A news graph pairs original tweets that match the tracked keywords with
their retweets. Edges always run original -> retweet and carry the
retweet delay in seconds, so the graph is a star forest: depth never
exceeds one. Retweets of retweets are re-pointed to the ultimate
original during parsing.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import InputError, TweetParseError
from .tokenizer import split_words


@dataclass(frozen=True)
class Tweet:
    tweet_id: str
    user_id: str | None
    user_followers: int
    timestamp: int
    text: str
    hashtags: tuple[str, ...]
    retweet_of: str | None = None

    @property
    def is_retweet(self) -> bool:
        return self.retweet_of is not None


@dataclass(frozen=True)
class Edge:
    original_id: str
    retweet_id: str
    time_weight: int


@dataclass
class NewsGraph:
    """Star forest of keyword-matched originals and their retweets."""

    originals: dict[str, Tweet] = field(default_factory=dict)
    retweets: dict[str, Tweet] = field(default_factory=dict)
    edges: tuple[Edge, ...] = ()
    unobserved: frozenset[str] = frozenset()
    rejected_clock_skew: int = 0
    # filled in by annotation: tweet_id -> predicted label / score
    labels: dict[str, int] = field(default_factory=dict)
    scores: dict[str, float] = field(default_factory=dict)

    @property
    def node_count(self) -> int:
        return len(self.originals) + len(self.retweets)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def out_degree(self, tweet_id: str) -> int:
        if tweet_id in self.retweets:
            return 0
        if tweet_id not in self.originals:
            raise InputError(f"unknown tweet id {tweet_id!r}")
        return self._out_degrees().get(tweet_id, 0)

    def _out_degrees(self) -> dict[str, int]:
        degrees: dict[str, int] = {}
        for edge in self.edges:
            degrees[edge.original_id] = degrees.get(edge.original_id, 0) + 1
        return degrees


@dataclass
class HashtagNetwork:
    """Hashtag usage counts and unordered co-occurrence counts."""

    counts: dict[str, int] = field(default_factory=dict)
    pair_counts: dict[tuple[str, str], int] = field(default_factory=dict)

    def weight(self, a: str, b: str) -> int:
        if a == b:
            return 0
        key = (a, b) if a < b else (b, a)
        return self.pair_counts.get(key, 0)


def _parse_created_at(value, line_no: int) -> int:
    if isinstance(value, str):
        raw = value.strip()
        if raw.endswith("Z"):
            raw = raw[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(raw)
        except ValueError as exc:
            raise TweetParseError(line_no, f"bad created_at {value!r}: {exc}") from exc
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise TweetParseError(line_no, f"created_at must be an ISO-8601 string, got {type(value).__name__}")


def _normalize_hashtags(raw, line_no: int) -> tuple[str, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise TweetParseError(line_no, "hashtags must be a list of strings")
    seen: dict[str, None] = {}
    for tag in raw:
        if not isinstance(tag, str):
            raise TweetParseError(line_no, f"hashtag {tag!r} is not a string")
        norm = tag.lstrip("#").lower().strip()
        if norm:
            seen.setdefault(norm, None)
    return tuple(seen)


def parse_tweets(lines) -> list[Tweet]:
    """Parse newline-delimited JSON tweets.

    Rejects duplicate ids and missing timestamps with the offending line
    number. Retweet pointers are resolved through chains so that every
    surviving pointer names the ultimate original.
    """
    parsed: dict[str, dict] = {}
    order: list[str] = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise TweetParseError(line_no, f"invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise TweetParseError(line_no, "expected a JSON object")
        if "id" not in obj or obj["id"] in (None, ""):
            raise TweetParseError(line_no, "missing tweet id")
        tweet_id = str(obj["id"])
        if tweet_id in parsed:
            raise TweetParseError(line_no, f"duplicate tweet id {tweet_id!r}")
        if "created_at" not in obj or obj["created_at"] in (None, ""):
            raise TweetParseError(line_no, "missing timestamp (created_at)")
        timestamp = _parse_created_at(obj["created_at"], line_no)
        if "text" not in obj or not isinstance(obj["text"], str):
            raise TweetParseError(line_no, "missing text")
        user_id = obj.get("user_id")
        user_id = None if user_id in (None, "") else str(user_id)
        followers = obj.get("user_followers", 0)
        if not isinstance(followers, int) or followers < 0:
            raise TweetParseError(line_no, f"user_followers must be a non-negative integer, got {followers!r}")
        retweet_of = obj.get("retweeted_status_id")
        retweet_of = None if retweet_of in (None, "") else str(retweet_of)
        if retweet_of == tweet_id:
            raise TweetParseError(line_no, f"tweet {tweet_id!r} retweets itself")
        parsed[tweet_id] = {
            "tweet_id": tweet_id,
            "user_id": user_id,
            "user_followers": followers,
            "timestamp": timestamp,
            "text": obj["text"],
            "hashtags": _normalize_hashtags(obj.get("hashtags"), line_no),
            "retweet_of": retweet_of,
        }
        order.append(tweet_id)

    # collapse retweet chains: every pointer ends at a non-retweet
    for tweet_id in order:
        target = parsed[tweet_id]["retweet_of"]
        if target is None:
            continue
        seen = {tweet_id}
        while target in parsed and parsed[target]["retweet_of"] is not None:
            if target in seen:
                raise InputError(f"retweet chain cycle involving tweet {target!r}")
            seen.add(target)
            target = parsed[target]["retweet_of"]
        if target in seen:
            raise InputError(f"retweet chain cycle involving tweet {target!r}")
        parsed[tweet_id]["retweet_of"] = target

    return [Tweet(**parsed[tid]) for tid in order]


def read_tweets(path) -> list[Tweet]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"tweet file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return parse_tweets(fh)


def _keyword_tokens(keywords) -> list[set[str]]:
    if not keywords:
        raise InputError("keyword list is empty")
    token_sets = []
    for kw in keywords:
        toks = set(split_words(kw))
        if not toks:
            raise InputError(f"keyword {kw!r} contains no matchable tokens")
        token_sets.append(toks)
    return token_sets


def match_keywords(tweet: Tweet, keywords, any_mode: bool = False) -> bool:
    """Whole-token keyword match against text and hashtags.

    All keywords must be present; pass any_mode=True for an OR match.
    A multi-word keyword matches when all of its words do.
    """
    token_sets = _keyword_tokens(keywords)
    present = set(split_words(tweet.text)) | set(tweet.hashtags)
    hits = (ts <= present for ts in token_sets)
    return any(hits) if any_mode else all(hits)


def build_news_graph(tweets, keywords, any_mode: bool = False,
                     unobserved_placeholders: bool = True) -> NewsGraph:
    """Assemble the propagation graph for the given keywords.

    Retweets dated before their original are counted and dropped rather
    than clamped. When the original of a cascade never appears in the
    stream, a placeholder original is synthesized from the earliest
    retweet (flagged in NewsGraph.unobserved) unless disabled.
    """
    tweets = list(tweets)
    by_id = {t.tweet_id: t for t in tweets}

    originals: dict[str, Tweet] = {}
    for t in tweets:
        if not t.is_retweet and match_keywords(t, keywords, any_mode):
            originals[t.tweet_id] = t

    # retweets grouped under their original, preserving stream order
    cascades: dict[str, list[Tweet]] = {}
    for t in tweets:
        if t.is_retweet:
            cascades.setdefault(t.retweet_of, []).append(t)

    unobserved: list[str] = []
    if unobserved_placeholders:
        for orig_id, group in cascades.items():
            if orig_id in by_id:
                continue
            earliest = min(group, key=lambda t: (t.timestamp, t.tweet_id))
            stand_in = Tweet(
                tweet_id=orig_id,
                user_id=None,
                user_followers=0,
                timestamp=earliest.timestamp,
                text=earliest.text,
                hashtags=earliest.hashtags,
            )
            if match_keywords(stand_in, keywords, any_mode):
                originals[orig_id] = stand_in
                unobserved.append(orig_id)

    retweets: dict[str, Tweet] = {}
    edges: list[Edge] = []
    rejected = 0
    for orig_id, original in originals.items():
        for rt in cascades.get(orig_id, ()):
            dt = rt.timestamp - original.timestamp
            if dt < 0:
                rejected += 1
                continue
            retweets[rt.tweet_id] = rt
            edges.append(Edge(orig_id, rt.tweet_id, dt))

    return NewsGraph(
        originals=originals,
        retweets=retweets,
        edges=tuple(edges),
        unobserved=frozenset(unobserved),
        rejected_clock_skew=rejected,
    )


def build_hashtag_network(tweets) -> HashtagNetwork:
    """Count hashtag usage and per-tweet unordered co-occurrence."""
    counts: dict[str, int] = {}
    pair_counts: dict[tuple[str, str], int] = {}
    for t in tweets:
        tags = sorted(set(t.hashtags))
        for tag in tags:
            counts[tag] = counts.get(tag, 0) + 1
        for a, b in itertools.combinations(tags, 2):
            pair_counts[(a, b)] = pair_counts.get((a, b), 0) + 1
    return HashtagNetwork(counts=counts, pair_counts=pair_counts)


def _tweet_to_dict(t: Tweet) -> dict:
    return {
        "id": t.tweet_id,
        "user_id": t.user_id,
        "user_followers": t.user_followers,
        "timestamp": t.timestamp,
        "text": t.text,
        "hashtags": list(t.hashtags),
        "retweet_of": t.retweet_of,
    }


def _tweet_from_dict(d: dict) -> Tweet:
    return Tweet(
        tweet_id=d["id"],
        user_id=d.get("user_id"),
        user_followers=int(d.get("user_followers", 0)),
        timestamp=int(d["timestamp"]),
        text=d["text"],
        hashtags=tuple(d.get("hashtags", ())),
        retweet_of=d.get("retweet_of"),
    )


def graph_to_dict(graph: NewsGraph, net: HashtagNetwork | None = None,
                  keywords=None) -> dict:
    doc = {
        "kind": "misinfograph.graph",
        "version": 1,
        "news_graph": {
            "originals": [_tweet_to_dict(t) for t in graph.originals.values()],
            "retweets": [_tweet_to_dict(t) for t in graph.retweets.values()],
            "edges": [[e.original_id, e.retweet_id, e.time_weight] for e in graph.edges],
            "unobserved": sorted(graph.unobserved),
            "rejected_clock_skew": graph.rejected_clock_skew,
        },
    }
    if keywords is not None:
        doc["keywords"] = list(keywords)
    if net is not None:
        doc["hashtag_network"] = {
            "counts": dict(sorted(net.counts.items())),
            "pairs": [[a, b, w] for (a, b), w in sorted(net.pair_counts.items())],
        }
    return doc


def graph_from_dict(doc: dict) -> tuple[NewsGraph, HashtagNetwork | None]:
    if not isinstance(doc, dict) or doc.get("kind") != "misinfograph.graph":
        raise InputError("not a graph document (missing kind marker)")
    if doc.get("version") != 1:
        raise InputError(f"unsupported graph document version {doc.get('version')!r}")
    ng = doc["news_graph"]
    graph = NewsGraph(
        originals={d["id"]: _tweet_from_dict(d) for d in ng["originals"]},
        retweets={d["id"]: _tweet_from_dict(d) for d in ng["retweets"]},
        edges=tuple(Edge(o, r, int(w)) for o, r, w in ng["edges"]),
        unobserved=frozenset(ng.get("unobserved", ())),
        rejected_clock_skew=int(ng.get("rejected_clock_skew", 0)),
    )
    net = None
    if "hashtag_network" in doc:
        hn = doc["hashtag_network"]
        net = HashtagNetwork(
            counts={k: int(v) for k, v in hn["counts"].items()},
            pair_counts={(a, b): int(w) for a, b, w in hn["pairs"]},
        )
    return graph, net


def save_graph(path, graph: NewsGraph, net: HashtagNetwork | None = None,
               keywords=None) -> None:
    doc = graph_to_dict(graph, net, keywords)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, ensure_ascii=False, indent=2)
        fh.write("\n")


def load_graph(path) -> tuple[NewsGraph, HashtagNetwork | None]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"graph file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    return graph_from_dict(doc)


def node_size(quantity, mode: str = "out_degree") -> float:
    """Square-root visual scaling with a floor of 1.0 for zero values."""
    if mode not in ("out_degree", "followers"):
        raise InputError(f"unknown sizing mode {mode!r}; use 'out_degree' or 'followers'")
    q = float(quantity)
    if q < 0:
        raise InputError(f"cannot size a negative quantity: {quantity}")
    return max(1.0, q**0.5)


def graph_node_size(graph: NewsGraph, tweet_id: str, mode: str = "out_degree") -> float:
    if mode == "out_degree":
        return node_size(graph.out_degree(tweet_id), mode)
    if mode == "followers":
        tweet = graph.originals.get(tweet_id) or graph.retweets.get(tweet_id)
        if tweet is None:
            raise InputError(f"unknown tweet id {tweet_id!r}")
        return node_size(tweet.user_followers, mode)
    raise InputError(f"unknown sizing mode {mode!r}; use 'out_degree' or 'followers'")
