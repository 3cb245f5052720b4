"""Command-line funnel: ingest raw streams, bucket activity, build,
filter, measure, lay out, and export interaction networks.

Subcommands compose over a shared shard-store root; filter/metrics/layout
also accept standalone GEXF files so every stage is scriptable on its
own. Exit codes: 0 success, 1 usage error, 2 partial failure, 3 fatal
I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    EmptyKeywordList,
    FunnelError,
    IOFailure,
    SourceUnreadable,
)
from .funnel import (
    FilterSpec,
    TimeBucketSeries,
    bucket_by_time,
    build_bucket_graph,
    filter_by_degree,
)
from .gexf import node_id, parse_gexf, write_gexf, write_signature_csv
from .graph import MultimodalGraph, build_graph
from .ingest import (
    StreamReplay,
    Topic,
    clean_tweet,
    iter_records,
    topic_match,
)
from .metrics import compute_centrality_report, layout_force
from .mockstream import open_stream_lines
from .store import Document, ShardStore

logger = logging.getLogger("tweetfunnel")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_IO = 3

DEFAULT_SHARDS = 3
DEFAULT_BUCKET_HOURS = 5.0
DEFAULT_ITERATIONS = 100
DEFAULT_SEED = 0
DEFAULT_WORKERS = 1

METRIC_COLUMNS = [
    "node_id", "kind", "label", "in_deg", "out_deg",
    "betweenness", "closeness", "eigenvector",
]


class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors exit 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="tweetfunnel", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of defaults; flags win")

    store_args = argparse.ArgumentParser(add_help=False)
    store_args.add_argument("--store", dest="store_root", help="store root directory")
    store_args.add_argument("--topic", help="topic name")
    store_args.add_argument("--shards", dest="shard_count", type=int,
                            help=f"shard count (default {DEFAULT_SHARDS})")

    p = sub.add_parser("ingest", parents=[common, store_args],
                       help="parse, match, clean, and store a raw stream")
    p.add_argument("--input", help="JSON-lines file or tcp://host:port")
    p.add_argument("--keywords", help="comma-separated topic keywords")
    p.add_argument("--speed", type=float, help="replay speed multiplier (0 = no pacing)")

    p = sub.add_parser("bucket", parents=[common, store_args],
                       help="write the activity-signature CSV for a topic")
    p.add_argument("--bucket-hours", type=float, help="bucket width in hours")
    p.add_argument("--out", help="output CSV path (default stdout)")

    p = sub.add_parser("build", parents=[common, store_args],
                       help="build the interaction graph and write GEXF")
    p.add_argument("--bucket-start", help="restrict to one bucket (epoch or ISO-8601)")
    p.add_argument("--bucket-hours", type=float, help="bucket width in hours")
    p.add_argument("--out", help="output GEXF path (default stdout)")

    p = sub.add_parser("filter", parents=[common],
                       help="degree-filter a GEXF graph")
    p.add_argument("--in", dest="in_path", required=True, help="input GEXF path")
    p.add_argument("--out", help="output GEXF path (default stdout)")
    p.add_argument("--min-degree", type=int, help="keep nodes with in or out degree > N")
    p.add_argument("--drop-retweets", action="store_true", default=None)
    p.add_argument("--drop-isolated", action="store_true", default=None,
                   help="also drop nodes isolated by the filter")

    p = sub.add_parser("metrics", parents=[common],
                       help="centrality table for a GEXF graph")
    p.add_argument("--in", dest="in_path", required=True, help="input GEXF path")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--workers", type=int, help="betweenness worker threads")

    p = sub.add_parser("layout", parents=[common],
                       help="metrics plus force-directed x,y columns")
    p.add_argument("--in", dest="in_path", required=True, help="input GEXF path")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--iterations", type=int, help="layout iterations")
    p.add_argument("--seed", type=int, help="layout RNG seed")
    p.add_argument("--workers", type=int, help="betweenness worker threads")

    p = sub.add_parser("export", parents=[common, store_args],
                       help="export a topic as GEXF or signature CSV")
    p.add_argument("--format", choices=["gexf", "csv"], help="artifact format")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--dynamic", action="store_true", default=None,
                   help="emit first-seen timestamps (GEXF only)")
    p.add_argument("--labels", choices=["text", "id"],
                   help="tweet node labels: cleaned text or tweet id")
    p.add_argument("--bucket-start", help="restrict to one bucket (epoch or ISO-8601)")
    p.add_argument("--bucket-hours", type=float, help="bucket width in hours")

    p = sub.add_parser("pipeline", parents=[common, store_args],
                       help="ingest then export every bucket end to end")
    p.add_argument("--input", help="JSON-lines file or tcp://host:port")
    p.add_argument("--keywords", help="comma-separated topic keywords")
    p.add_argument("--speed", type=float, help="replay speed multiplier")
    p.add_argument("--out-dir", help="artifact directory")
    p.add_argument("--bucket-hours", type=float, help="bucket width in hours")
    p.add_argument("--min-degree", type=int)
    p.add_argument("--drop-retweets", action="store_true", default=None)
    p.add_argument("--iterations", type=int, help="layout iterations")
    p.add_argument("--seed", type=int, help="layout RNG seed")
    p.add_argument("--workers", type=int, help="betweenness worker threads")
    p.add_argument("--dynamic", action="store_true", default=None)
    p.add_argument("--labels", choices=["text", "id"])

    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise IOFailure(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError(f"config {path!r} must hold a JSON object")
    return config


def _setting(args, config: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is None:
        value = config.get(name, default)
    return value


def _keywords_list(value) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return [str(part) for part in value]


def _parse_point(text: str) -> float:
    """Epoch seconds, or an ISO-8601 instant (naive means UTC)."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        moment = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise UsageError(f"cannot parse time {text!r}: {exc}") from exc
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.timestamp()


def _require(args, config, name: str, flag: str):
    value = _setting(args, config, name)
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _open_store(args, config) -> ShardStore:
    root = _require(args, config, "store_root", "--store")
    shard_count = int(_setting(args, config, "shard_count", DEFAULT_SHARDS))
    if shard_count < 1:
        raise UsageError("--shards must be >= 1")
    try:
        return ShardStore.open_or_create(root, shard_count)
    except OSError as exc:
        raise IOFailure(f"cannot open store at {root!r}: {exc}") from exc


def _input_lines(source: str):
    if source.startswith("tcp://"):
        rest = source[len("tcp://"):]
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise UsageError(f"bad stream address {source!r}")
        return open_stream_lines(host, int(port))

    def read_file():
        with open(source, encoding="utf-8", errors="replace") as fh:
            yield from fh

    return read_file()


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        target = Path(path)
        if target.parent != Path(""):
            target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path!r}: {exc}") from exc


def _read_graph(path: str) -> MultimodalGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read {path!r}: {exc}") from exc
    graph, _ = parse_gexf(text)
    return graph


def _bucket_width(args, config) -> float:
    hours = float(_setting(args, config, "bucket_hours", DEFAULT_BUCKET_HOURS))
    if hours <= 0:
        raise UsageError("--bucket-hours must be > 0")
    return hours * 3600.0


def _metrics_csv(graph: MultimodalGraph, workers: int,
                 positions: dict | None = None) -> str:
    report = compute_centrality_report(graph, workers=workers)
    buffer = io.StringIO()
    columns = list(METRIC_COLUMNS)
    if positions is not None:
        columns += ["x", "y"]
    writer = csv.writer(buffer)
    writer.writerow(columns)
    for key in sorted(graph.node_keys(), key=node_id):
        node = graph.node(key)
        row_metrics = report.metrics[key]
        row = [
            node_id(key), node.kind, node.label,
            row_metrics.degree_in, row_metrics.degree_out,
            repr(row_metrics.betweenness), repr(row_metrics.closeness),
            repr(row_metrics.eigenvector),
        ]
        if positions is not None:
            x, y = positions[key]
            row += [repr(x), repr(y)]
        writer.writerow(row)
    return buffer.getvalue()


# -- subcommands -----------------------------------------------------------


def cmd_ingest(args, config) -> int:
    topic_name = _require(args, config, "topic", "--topic")
    keywords = _keywords_list(_setting(args, config, "keywords"))
    topic = Topic(topic_name, keywords)
    speed = float(_setting(args, config, "speed", 0.0))
    source = _require(args, config, "input", "--input")

    store = _open_store(args, config)
    try:
        store.register_topic(topic.name)
        json_errors = 0

        def on_bad_line(line, exc):
            nonlocal json_errors
            json_errors += 1

        lines = _input_lines(source)
        replay = StreamReplay(iter_records(lines, on_bad_line), speed=speed)
        matched = stored = 0
        for raw in replay:
            if not topic_match(raw, topic):
                continue
            matched += 1
            cleaned = clean_tweet(raw)
            doc = Document(
                key=cleaned.tweet_id,
                topic=topic.name,
                payload=cleaned.to_payload(),
                stored_at=time.time(),
            )
            store.put_doc(topic.name, doc)
            stored += 1
    finally:
        store.close()

    print(
        f"parsed={replay.emitted} matched={matched} stored={stored} "
        f"reordered={replay.reordered} "
        f"parse_errors={json_errors + replay.parse_errors}"
    )
    return EXIT_OK


def cmd_bucket(args, config) -> int:
    topic = _require(args, config, "topic", "--topic")
    width = _bucket_width(args, config)
    store = _open_store(args, config)
    try:
        series = bucket_by_time(store, topic, width)
    finally:
        store.close()
    _write_text(_setting(args, config, "out"), write_signature_csv(series))
    return EXIT_OK


def _windowed_graph(args, config, store: ShardStore, topic: str) -> MultimodalGraph:
    start_text = _setting(args, config, "bucket_start")
    if start_text is None:
        return build_graph(store, topic)
    start = _parse_point(str(start_text))
    width = _bucket_width(args, config)
    return build_bucket_graph(store, topic, start, width)


def cmd_build(args, config) -> int:
    topic = _require(args, config, "topic", "--topic")
    store = _open_store(args, config)
    try:
        graph = _windowed_graph(args, config, store, topic)
    finally:
        store.close()
    _write_text(_setting(args, config, "out"), write_gexf(graph))
    return EXIT_OK


def cmd_filter(args, config) -> int:
    graph = _read_graph(args.in_path)
    spec = FilterSpec(
        min_degree=int(_setting(args, config, "min_degree", 0)),
        drop_retweets=bool(_setting(args, config, "drop_retweets", False)),
        drop_isolated_after=bool(_setting(args, config, "drop_isolated", False)),
    )
    filtered = filter_by_degree(graph, spec)
    _write_text(_setting(args, config, "out"), write_gexf(filtered))
    return EXIT_OK


def cmd_metrics(args, config) -> int:
    graph = _read_graph(args.in_path)
    workers = int(_setting(args, config, "workers", DEFAULT_WORKERS))
    _write_text(_setting(args, config, "out"), _metrics_csv(graph, workers))
    return EXIT_OK


def cmd_layout(args, config) -> int:
    graph = _read_graph(args.in_path)
    workers = int(_setting(args, config, "workers", DEFAULT_WORKERS))
    iterations = int(_setting(args, config, "iterations", DEFAULT_ITERATIONS))
    seed = int(_setting(args, config, "seed", DEFAULT_SEED))
    result = layout_force(graph, iterations, seed)
    text = _metrics_csv(graph, workers, positions=result.positions)
    _write_text(_setting(args, config, "out"), text)
    return EXIT_OK


def cmd_export(args, config) -> int:
    topic = _require(args, config, "topic", "--topic")
    fmt = _setting(args, config, "format", "gexf")
    store = _open_store(args, config)
    try:
        if fmt == "csv":
            width = _bucket_width(args, config)
            text = write_signature_csv(bucket_by_time(store, topic, width))
        elif fmt == "gexf":
            graph = _windowed_graph(args, config, store, topic)
            text = write_gexf(
                graph,
                dynamic=bool(_setting(args, config, "dynamic", False)),
                label_mode=_setting(args, config, "labels", "text"),
            )
        else:
            raise UsageError(f"unknown format {fmt!r}")
    finally:
        store.close()
    _write_text(_setting(args, config, "out"), text)
    return EXIT_OK


def _bucket_token(start: float) -> str:
    if float(start).is_integer():
        return f"{int(start):012d}"
    return repr(float(start)).replace(".", "p")


def cmd_pipeline(args, config) -> int:
    topic_name = _require(args, config, "topic", "--topic")
    out_dir = Path(_require(args, config, "out_dir", "--out-dir"))
    width = _bucket_width(args, config)
    min_degree = int(_setting(args, config, "min_degree", 0))
    drop_retweets = bool(_setting(args, config, "drop_retweets", False))
    iterations = int(_setting(args, config, "iterations", DEFAULT_ITERATIONS))
    seed = int(_setting(args, config, "seed", DEFAULT_SEED))
    workers = int(_setting(args, config, "workers", DEFAULT_WORKERS))
    dynamic = bool(_setting(args, config, "dynamic", False))
    labels = _setting(args, config, "labels", "text")

    if _setting(args, config, "input") is not None:
        status = cmd_ingest(args, config)
        if status != EXIT_OK:
            return status

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOFailure(f"cannot create {str(out_dir)!r}: {exc}") from exc

    store = _open_store(args, config)
    failures = 0
    written = 0
    try:
        series = bucket_by_time(store, topic_name, width)
        _write_text(str(out_dir / "signature.csv"), write_signature_csv(series))
        spec = FilterSpec(min_degree=min_degree, drop_retweets=drop_retweets)
        for bucket in series.buckets:
            token = _bucket_token(bucket.start)
            try:
                graph = build_bucket_graph(store, topic_name, bucket.start, width)
                filtered = filter_by_degree(graph, spec)
                result = layout_force(filtered, iterations, seed)
                _write_text(
                    str(out_dir / f"bucket-{token}.gexf"),
                    write_gexf(filtered, positions=result,
                               dynamic=dynamic, label_mode=labels),
                )
                _write_text(
                    str(out_dir / f"bucket-{token}.metrics.csv"),
                    _metrics_csv(filtered, workers, positions=result.positions),
                )
                written += 1
            except Exception as exc:
                failures += 1
                logger.error("bucket %s failed: %s", token, exc)
    finally:
        store.close()

    print(
        f"signature={out_dir / 'signature.csv'} buckets={len(series)} "
        f"exported={written} failures={failures}"
    )
    return EXIT_PARTIAL if failures else EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "bucket": cmd_bucket,
    "build": cmd_build,
    "filter": cmd_filter,
    "metrics": cmd_metrics,
    "layout": cmd_layout,
    "export": cmd_export,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except (UsageError, EmptyKeywordList, ValueError) as exc:
        print(f"tweetfunnel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IOFailure, SourceUnreadable, OSError) as exc:
        print(f"tweetfunnel: {exc}", file=sys.stderr)
        return EXIT_IO
    except FunnelError as exc:
        print(f"tweetfunnel: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
