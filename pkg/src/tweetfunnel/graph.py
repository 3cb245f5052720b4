"""Directed multimodal interaction graph of User and Tweet nodes.

One tweet maps onto the graph as: an authored edge from its author to the
tweet node, plus mention edges from both the author and the tweet node to
every mentioned user. Repeated (source, target, kind) pairs aggregate into
weighted edges rather than parallel edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import DuplicateTweetId
from .ingest import CleanTweet

USER = "user"
TWEET = "tweet"
AUTHORED = "authored"
MENTIONS = "mentions"

# Node keys are (kind, id) tuples; user ids are case-folded handles so
# "UserB" and "userb" are one node, tweet ids are used as-is.
NodeKey = tuple[str, str]
EdgeKey = tuple[NodeKey, NodeKey, str]


def user_key(handle: str) -> NodeKey:
    return (USER, handle.casefold())


def tweet_key(tweet_id: str) -> NodeKey:
    return (TWEET, tweet_id)


@dataclass
class NodeRef:
    kind: str
    id: str
    label: str
    is_retweet: bool = False
    first_seen: float = 0.0

    @property
    def key(self) -> NodeKey:
        return (self.kind, self.id)


@dataclass
class EdgeRef:
    source: NodeKey
    target: NodeKey
    kind: str
    weight: int = 1
    first_seen: float = 0.0

    @property
    def key(self) -> EdgeKey:
        return (self.source, self.target, self.kind)


@dataclass
class _NodeData:
    label: str
    is_retweet: bool = False
    first_seen: float = 0.0
    authored_by: NodeKey | None = None  # tweet nodes only


@dataclass
class _EdgeData:
    weight: int = 1
    first_seen: float = 0.0


class MultimodalGraph:
    """Directed typed graph with O(1) degree lookups."""

    def __init__(self):
        self._nodes: dict[NodeKey, _NodeData] = {}
        self._edges: dict[EdgeKey, _EdgeData] = {}
        self._out: dict[NodeKey, set[EdgeKey]] = {}
        self._in: dict[NodeKey, set[EdgeKey]] = {}

    # -- accessors ---------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def __contains__(self, key: NodeKey) -> bool:
        return key in self._nodes

    def has_edge(self, source: NodeKey, target: NodeKey, kind: str) -> bool:
        return (source, target, kind) in self._edges

    def node(self, key: NodeKey) -> NodeRef:
        data = self._nodes[key]
        return NodeRef(key[0], key[1], data.label, data.is_retweet, data.first_seen)

    def nodes(self) -> Iterator[NodeRef]:
        for key in self._nodes:
            yield self.node(key)

    def node_keys(self) -> Iterator[NodeKey]:
        return iter(self._nodes)

    def edge(self, source: NodeKey, target: NodeKey, kind: str) -> EdgeRef:
        data = self._edges[(source, target, kind)]
        return EdgeRef(source, target, kind, data.weight, data.first_seen)

    def edges(self) -> Iterator[EdgeRef]:
        for (source, target, kind), data in self._edges.items():
            yield EdgeRef(source, target, kind, data.weight, data.first_seen)

    def in_degree(self, key: NodeKey) -> int:
        return len(self._in.get(key, ()))

    def out_degree(self, key: NodeKey) -> int:
        return len(self._out.get(key, ()))

    def total_degree(self, key: NodeKey) -> int:
        return self.in_degree(key) + self.out_degree(key)

    def out_edges(self, key: NodeKey) -> Iterator[EdgeKey]:
        return iter(self._out.get(key, ()))

    def in_edges(self, key: NodeKey) -> Iterator[EdgeKey]:
        return iter(self._in.get(key, ()))

    # -- low-level construction (used by merge and the GEXF reader) ---------

    def ensure_node(
        self,
        key: NodeKey,
        label: str,
        is_retweet: bool = False,
        first_seen: float = 0.0,
    ) -> None:
        """Insert or refresh a node; the earliest (first_seen, label) wins."""
        data = self._nodes.get(key)
        if data is None:
            self._nodes[key] = _NodeData(label, is_retweet, first_seen)
            self._out.setdefault(key, set())
            self._in.setdefault(key, set())
            return
        if (first_seen, label) < (data.first_seen, data.label):
            data.first_seen = first_seen
            data.label = label
        data.is_retweet = data.is_retweet or is_retweet

    def add_edge_raw(
        self,
        source: NodeKey,
        target: NodeKey,
        kind: str,
        weight: int = 1,
        first_seen: float = 0.0,
    ) -> None:
        if source == target:
            return
        edge_key = (source, target, kind)
        data = self._edges.get(edge_key)
        if data is None:
            self._edges[edge_key] = _EdgeData(weight, first_seen)
            self._out[source].add(edge_key)
            self._in[target].add(edge_key)
        else:
            data.weight += weight
            data.first_seen = min(data.first_seen, first_seen)

    # -- the tweet mapping ------------------------------------------------

    def add_tweet(self, tweet: CleanTweet) -> None:
        """Fold one cleaned tweet into the graph.

        Ensures the author and tweet nodes exist, adds/increments the
        authored edge, and for each mention adds/increments mention edges
        from both the author and the tweet node to the mentioned user.
        """
        author = user_key(tweet.author_handle)
        ts = tweet.created_at
        self.ensure_node(author, tweet.author_handle, first_seen=ts)

        tkey = tweet_key(tweet.tweet_id)
        existing = self._nodes.get(tkey)
        if existing is not None and existing.authored_by not in (None, author):
            raise DuplicateTweetId(
                f"tweet {tweet.tweet_id!r} arrived with author {tweet.author_handle!r} "
                f"but is already attributed to {existing.authored_by[1]!r}"
            )
        self.ensure_node(tkey, tweet.text, is_retweet=tweet.is_retweet, first_seen=ts)
        self._nodes[tkey].authored_by = author

        self.add_edge_raw(author, tkey, AUTHORED, first_seen=ts)
        for handle in tweet.mentions:
            mentioned = user_key(handle)
            if mentioned == author:
                continue
            self.ensure_node(mentioned, handle, first_seen=ts)
            self.add_edge_raw(author, mentioned, MENTIONS, first_seen=ts)
            self.add_edge_raw(tkey, mentioned, MENTIONS, first_seen=ts)

    # -- structure-level operations -----------------------------------------

    def induced_subgraph(self, keep: set[NodeKey]) -> "MultimodalGraph":
        """Subgraph on `keep`; edges survive iff both endpoints survive."""
        sub = MultimodalGraph()
        for key in self._nodes:
            if key in keep:
                data = self._nodes[key]
                sub.ensure_node(key, data.label, data.is_retweet, data.first_seen)
                sub._nodes[key].authored_by = data.authored_by
        for (source, target, kind), data in self._edges.items():
            if source in keep and target in keep:
                sub.add_edge_raw(source, target, kind, data.weight, data.first_seen)
        return sub

    def copy(self) -> "MultimodalGraph":
        return self.induced_subgraph(set(self._nodes))

    def same_structure(self, other: "MultimodalGraph") -> bool:
        """Equality on node set, retweet flags, edge set, and weights."""
        if set(self._nodes) != set(other._nodes):
            return False
        for key, data in self._nodes.items():
            if data.is_retweet != other._nodes[key].is_retweet:
                return False
        if set(self._edges) != set(other._edges):
            return False
        for key, data in self._edges.items():
            if data.weight != other._edges[key].weight:
                return False
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultimodalGraph):
            return NotImplemented
        return (
            self.same_structure(other)
            and all(
                self._nodes[k].label == other._nodes[k].label
                and self._nodes[k].first_seen == other._nodes[k].first_seen
                for k in self._nodes
            )
            and all(
                self._edges[k].first_seen == other._edges[k].first_seen
                for k in self._edges
            )
        )

    def __repr__(self) -> str:
        return f"MultimodalGraph(nodes={self.node_count}, edges={self.edge_count})"


def add_tweet(graph: MultimodalGraph, tweet: CleanTweet) -> MultimodalGraph:
    graph.add_tweet(tweet)
    return graph


def build_graph(store, topic: str, time_range=None) -> MultimodalGraph:
    """Fold every stored tweet of a topic into a graph, in timestamp order."""
    graph = MultimodalGraph()
    for doc in store.scan_collection(topic, time_range):
        graph.add_tweet(CleanTweet.from_payload(doc.payload))
    return graph


def merge_graphs(a: MultimodalGraph, b: MultimodalGraph) -> MultimodalGraph:
    """Union of nodes and edges; weights sum, first_seen takes the minimum."""
    merged = MultimodalGraph()
    for g in (a, b):
        for key, data in g._nodes.items():
            merged.ensure_node(key, data.label, data.is_retweet, data.first_seen)
            if data.authored_by is not None:
                merged._nodes[key].authored_by = data.authored_by
        for (source, target, kind), data in g._edges.items():
            merged.add_edge_raw(source, target, kind, data.weight, data.first_seen)
    return merged
