"""Reduce graphs to signal-bearing cores and compute activity signatures.

Degree filtering is a one-pass threshold on degrees measured against the
input graph (optionally after retweet removal), not an iterative core
decomposition. Time bucketing aligns to absolute epoch multiples of the
bucket width so series from different topics share one axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidWidth
from .graph import TWEET, MultimodalGraph, build_graph
from .ingest import CleanTweet

DEFAULT_BUCKET_WIDTH = 18000  # five hours


@dataclass
class FilterSpec:
    """Keep nodes whose in-degree or out-degree exceeds min_degree."""

    min_degree: int = 0
    drop_retweets: bool = False
    drop_isolated_after: bool = False

    def __post_init__(self):
        if self.min_degree < 0:
            raise ValueError("min_degree must be >= 0")


@dataclass
class TimeBucket:
    start: float
    tweet_count: int = 0
    unique_actor_count: int = 0
    mention_edge_count: int = 0


@dataclass
class TimeBucketSeries:
    """Per-window activity counts; empty buckets are omitted."""

    bucket_width: float
    buckets: list[TimeBucket] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.buckets)

    def total_tweets(self) -> int:
        return sum(b.tweet_count for b in self.buckets)


def filter_by_degree(graph: MultimodalGraph, spec: FilterSpec) -> MultimodalGraph:
    """One-pass degree filter; hubs with degree > min_degree survive.

    Degrees are edge counts (weights ignored) measured on the input graph,
    after retweet removal when requested; edges survive iff both endpoints
    survive; drop_isolated_after strips nodes left with no edges.
    """
    if spec.drop_retweets:
        keep = {
            node.key
            for node in graph.nodes()
            if not (node.kind == TWEET and node.is_retweet)
        }
        graph = graph.induced_subgraph(keep)

    n = spec.min_degree
    survivors = {
        key
        for key in graph.node_keys()
        if graph.in_degree(key) > n or graph.out_degree(key) > n
    }
    result = graph.induced_subgraph(survivors)

    if spec.drop_isolated_after:
        connected = {
            key for key in result.node_keys() if result.total_degree(key) > 0
        }
        result = result.induced_subgraph(connected)
    return result


def bucket_start_for(created_at: float, bucket_width: float) -> float:
    start = math.floor(created_at / bucket_width) * bucket_width
    if isinstance(bucket_width, int) or (
        isinstance(bucket_width, float) and bucket_width.is_integer()
    ):
        return int(start)
    return start


def bucket_by_time(store, topic: str, bucket_width: float = DEFAULT_BUCKET_WIDTH) -> TimeBucketSeries:
    """Group a topic's stored tweets into absolute-aligned time windows.

    Counts per bucket: tweets, distinct authors (case-folded), and mention
    occurrences (per-tweet mention list lengths, before edge aggregation).
    """
    if bucket_width <= 0:
        raise InvalidWidth(f"bucket width must be > 0, got {bucket_width}")
    counts: dict[float, list] = {}
    for doc in store.scan_collection(topic):
        tweet = CleanTweet.from_payload(doc.payload)
        start = bucket_start_for(tweet.created_at, bucket_width)
        slot = counts.get(start)
        if slot is None:
            slot = counts[start] = [0, set(), 0]
        slot[0] += 1
        slot[1].add(tweet.author_handle.casefold())
        slot[2] += len(tweet.mentions)
    buckets = [
        TimeBucket(start, c[0], len(c[1]), c[2])
        for start, c in sorted(counts.items())
    ]
    return TimeBucketSeries(bucket_width, buckets)


def build_bucket_graph(
    store, topic: str, bucket_start: float, bucket_width: float
) -> MultimodalGraph:
    """Interaction graph restricted to one time window."""
    if bucket_width <= 0:
        raise InvalidWidth(f"bucket width must be > 0, got {bucket_width}")
    return build_graph(store, topic, (bucket_start, bucket_start + bucket_width))
