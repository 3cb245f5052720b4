from __future__ import annotations

import json

import pytest
from hypothesis import HealthCheck, settings

from tweetfunnel.graph import MultimodalGraph
from tweetfunnel.ingest import RawTweet, clean_tweet
from tweetfunnel.store import Document, ShardStore

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def make_raw(tweet_id, author, text, created_at, **extra) -> RawTweet:
    return RawTweet(
        tweet_id=str(tweet_id),
        author_handle=author,
        text=text,
        created_at=created_at,
        **extra,
    )


def store_tweets(store: ShardStore, topic: str, tweets) -> int:
    """Clean and persist RawTweets; returns number stored."""
    store.register_topic(topic)
    count = 0
    for raw in tweets:
        cleaned = clean_tweet(raw)
        store.put_doc(
            topic,
            Document(
                key=cleaned.tweet_id,
                topic=topic,
                payload=cleaned.to_payload(),
                stored_at=0.0,
            ),
        )
        count += 1
    return count


def two_mention_graph() -> MultimodalGraph:
    """One tweet with two mentions: UserA writes "@UserB @UserC"."""
    graph = MultimodalGraph()
    graph.add_tweet(clean_tweet(make_raw("1", "UserA", "@UserB @UserC", 100)))
    return graph


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


@pytest.fixture
def fresh_store(tmp_path):
    store = ShardStore.create(tmp_path / "store", shard_count=3)
    yield store
    store.close()
