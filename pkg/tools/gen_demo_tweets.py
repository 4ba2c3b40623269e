"""Regenerate the bundled demo tweet stream.

Writes src/misinfograph/data/demo_tweets.ndjson: exactly 500 tweets
around an election topic with retweet cascades (including chains and a
couple of quirks worth demonstrating: two unobserved originals and one
clock-skewed retweet). Deterministic; run from the repository root.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "misinfograph" / "data" / "demo_tweets.ndjson"

BASE_TS = int(datetime(2020, 10, 26, 8, 0, 0, tzinfo=timezone.utc).timestamp())

FAKE_TEXTS = [
    "shocking election hoax exposed by insiders they dont want you to see",
    "secretly banned election footage reveals the coverup behind the vote",
    "unbelievable miracle cure for election stress suppressed by the media",
    "astonishing evidence of election fraud exposed in leaked files",
    "the shocking truth about ballot counting they suppressed",
    "insider exposes secret election plan hidden from voters",
]
REAL_TEXTS = [
    "official election report published by the county board today",
    "spokesperson confirmed election results after the audit statement",
    "new study on election turnout published this morning",
    "officials announced certified election totals according to the registrar",
    "survey data on early election voting released in the weekly report",
    "election officials published the updated polling station list",
]
FILLER_TEXTS = [
    "weekend weather looks great for the harvest festival",
    "local team wins the league final after extra time",
    "new bridge opens downtown easing the morning commute",
    "museum announces late night hours for the autumn season",
    "city library adds a record number of new members",
    "community garden volunteers plant trees along the river",
]
FAKE_TAGS = [["election", "exposed"], ["election", "hoax"], ["election", "coverup"]]
REAL_TAGS = [["election", "results"], ["election", "official"], ["election", "turnout"]]
FILLER_TAG_CHOICES = [["sports"], ["weather"], ["local"], [], ["community", "local"]]


def iso(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def main() -> None:
    rng = np.random.default_rng(20201026)
    lines = []

    # two user pools: one amplifies fake originals, the other real ones
    fake_users = [f"amp_{i:02d}" for i in range(20)]
    real_users = [f"press_{i:02d}" for i in range(20)]
    misc_users = [f"user_{i:02d}" for i in range(30)]
    followers = {}
    for u in fake_users + real_users + misc_users:
        followers[u] = int(rng.integers(10, 20000))

    tweet_no = 0

    def next_id() -> str:
        nonlocal tweet_no
        tweet_no += 1
        return f"tw{tweet_no:04d}"

    def emit(tid, user, ts, text, tags, rt_of=None):
        lines.append({
            "id": tid,
            "user_id": user,
            "user_followers": followers.get(user, 0),
            "created_at": iso(ts),
            "text": text,
            "hashtags": tags,
            "retweeted_status_id": rt_of,
        })

    # originals: 10 fake-flavored, 10 real-flavored, cascade sizes vary
    cascade_sizes_fake = [70, 45, 30, 22, 14, 9, 6, 4, 2, 0]
    cascade_sizes_real = [50, 35, 25, 18, 12, 8, 5, 3, 1, 0]
    cascades = []
    for i in range(10):
        tid = next_id()
        ts = BASE_TS + int(rng.integers(0, 7200))
        author = str(rng.choice(fake_users))
        emit(tid, author, ts, FAKE_TEXTS[i % len(FAKE_TEXTS)],
             FAKE_TAGS[i % len(FAKE_TAGS)])
        cascades.append((tid, ts, "fake", cascade_sizes_fake[i]))
    for i in range(10):
        tid = next_id()
        ts = BASE_TS + int(rng.integers(0, 7200))
        author = str(rng.choice(real_users))
        emit(tid, author, ts, REAL_TEXTS[i % len(REAL_TEXTS)],
             REAL_TAGS[i % len(REAL_TAGS)])
        cascades.append((tid, ts, "real", cascade_sizes_real[i]))

    # retweets: mostly same-camp users, occasionally from the misc pool;
    # every 7th retweet in a cascade chains off the previous retweet
    for orig_id, orig_ts, camp, size in cascades:
        pool = fake_users if camp == "fake" else real_users
        prev_rt = None
        for k in range(size):
            rid = next_id()
            delay = int(rng.integers(60, 3600 * 10))
            user = str(rng.choice(pool if rng.random() < 0.8 else misc_users))
            target = prev_rt if (k % 7 == 6 and prev_rt) else orig_id
            emit(rid, user, orig_ts + delay, f"RT {camp} election item", ["election"],
                 rt_of=target)
            prev_rt = rid

    # two unobserved originals: retweets pointing at ids never emitted
    for ghost, camp in (("ghost01", "fake"), ("ghost02", "real")):
        text = ("astonishing election coverup exposed in deleted post"
                if camp == "fake" else "official election recount statement published")
        for _ in range(4):
            rid = next_id()
            user = str(rng.choice(fake_users if camp == "fake" else real_users))
            emit(rid, user, BASE_TS + int(rng.integers(3600, 3600 * 12)), text,
                 ["election"], rt_of=ghost)

    # one clock-skewed retweet: timestamped before its original
    skew_orig = cascades[0][0]
    rid = next_id()
    emit(rid, "user_00", cascades[0][1] - 120, "RT fake election item", ["election"],
         rt_of=skew_orig)

    # filler to exactly 500 lines
    while len(lines) < 500:
        tid = next_id()
        user = str(rng.choice(misc_users))
        ts = BASE_TS + int(rng.integers(0, 3600 * 24))
        text = str(rng.choice(FILLER_TEXTS))
        tags = FILLER_TAG_CHOICES[int(rng.integers(0, len(FILLER_TAG_CHOICES)))]
        emit(tid, user, ts, text, list(tags))

    if len(lines) != 500:
        raise SystemExit(f"expected 500 lines, built {len(lines)}")
    with open(OUT, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(json.dumps(line, sort_keys=True) + "\n")
    print(f"wrote {len(lines)} tweets to {OUT}")


if __name__ == "__main__":
    main()
