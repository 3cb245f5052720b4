"""tweetfunnel: funnel raw topical tweet streams into filtered multimodal
interaction networks, centrality tables, activity signatures, and GEXF.

The pipeline stages mirror the CLI subcommands: ingest (parse, match,
clean, store), bucket (activity signatures), build (graph construction),
filter (degree thresholds), metrics (centrality), layout (force-directed
positions), and export (GEXF / CSV artifacts).
"""

from .errors import (
    DuplicateTweetId,
    EigenvectorNonConvergence,
    EmptyKeywordList,
    FunnelError,
    InvalidRange,
    InvalidWidth,
    IOFailure,
    MalformedTimestamp,
    MalformedXml,
    MissingField,
    MissingKindAttribute,
    ShardCountMismatch,
    SourceUnreadable,
    UnknownNodeReference,
    UnknownTopic,
    ZeroShards,
)
from .funnel import (
    DEFAULT_BUCKET_WIDTH,
    FilterSpec,
    TimeBucket,
    TimeBucketSeries,
    bucket_by_time,
    bucket_start_for,
    build_bucket_graph,
    filter_by_degree,
)
from .gexf import parse_gexf, write_gexf, write_signature_csv
from .graph import (
    AUTHORED,
    MENTIONS,
    TWEET,
    USER,
    EdgeRef,
    MultimodalGraph,
    NodeRef,
    build_graph,
    merge_graphs,
    tweet_key,
    user_key,
)
from .ingest import (
    CleanTweet,
    RawTweet,
    StreamReplay,
    Topic,
    clean_text,
    clean_tweet,
    detect_retweet,
    extract_mentions,
    iter_records,
    parse_tweet,
    replay_stream,
    topic_match,
)
from .metrics import (
    KERNEL_BACKEND,
    CentralityReport,
    LayoutResult,
    NodeMetrics,
    betweenness_centrality,
    closeness_centrality,
    compute_centrality_report,
    degree_centrality,
    eigenvector_centrality,
    layout_force,
)
from .mockstream import MockStreamServer, open_stream_lines
from .store import Document, ShardConfig, ShardStore, fnv1a64, route_key

__version__ = "0.1.0"

__all__ = [
    "AUTHORED",
    "CentralityReport",
    "CleanTweet",
    "DEFAULT_BUCKET_WIDTH",
    "Document",
    "DuplicateTweetId",
    "EdgeRef",
    "EigenvectorNonConvergence",
    "EmptyKeywordList",
    "FilterSpec",
    "FunnelError",
    "IOFailure",
    "InvalidRange",
    "InvalidWidth",
    "KERNEL_BACKEND",
    "LayoutResult",
    "MENTIONS",
    "MalformedTimestamp",
    "MalformedXml",
    "MissingField",
    "MissingKindAttribute",
    "MockStreamServer",
    "MultimodalGraph",
    "NodeMetrics",
    "NodeRef",
    "RawTweet",
    "ShardConfig",
    "ShardCountMismatch",
    "ShardStore",
    "SourceUnreadable",
    "StreamReplay",
    "TWEET",
    "TimeBucket",
    "TimeBucketSeries",
    "Topic",
    "USER",
    "UnknownNodeReference",
    "UnknownTopic",
    "ZeroShards",
    "betweenness_centrality",
    "bucket_by_time",
    "bucket_start_for",
    "build_bucket_graph",
    "build_graph",
    "clean_text",
    "clean_tweet",
    "closeness_centrality",
    "compute_centrality_report",
    "degree_centrality",
    "detect_retweet",
    "eigenvector_centrality",
    "extract_mentions",
    "filter_by_degree",
    "fnv1a64",
    "iter_records",
    "layout_force",
    "merge_graphs",
    "open_stream_lines",
    "parse_gexf",
    "parse_tweet",
    "replay_stream",
    "route_key",
    "topic_match",
    "tweet_key",
    "user_key",
    "write_gexf",
    "write_signature_csv",
]
