import csv
import io
import json

import pytest

from tweetfunnel.cli import EXIT_IO, EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, main
from tweetfunnel.gexf import parse_gexf
from tweetfunnel.graph import tweet_key, user_key
from tweetfunnel.store import ShardStore

from conftest import write_jsonl


def record(tweet_id, author, text, created_at):
    return {
        "id": str(tweet_id),
        "user": {"screen_name": author},
        "text": text,
        "created_at": created_at,
    }


def feed_records():
    """Ten records, eight matching #mh370, timestamps ascending."""
    rows = []
    for i in range(10):
        text = f"#MH370 report {i}" if i % 5 != 0 else f"weather note {i}"
        rows.append(record(100 + i, f"U{i % 4}", text + f" @U{(i + 1) % 4}", i * 1000))
    return rows


def run_ingest(tmp_path, records, capsys, extra=()):
    feed = tmp_path / "feed.jsonl"
    write_jsonl(feed, records)
    code = main([
        "ingest",
        "--store", str(tmp_path / "store"),
        "--topic", "mh370",
        "--keywords", "#mh370",
        "--input", str(feed),
        *extra,
    ])
    return code, capsys.readouterr().out


class TestUsageErrors:
    def test_no_subcommand(self):
        assert main([]) == EXIT_USAGE

    def test_unknown_flag(self):
        assert main(["ingest", "--frobnicate"]) == EXIT_USAGE

    def test_filter_requires_in(self):
        assert main(["filter"]) == EXIT_USAGE

    def test_ingest_requires_topic(self, tmp_path):
        code = main([
            "ingest", "--store", str(tmp_path / "s"),
            "--keywords", "x", "--input", "nope.jsonl",
        ])
        assert code == EXIT_USAGE

    def test_empty_keyword_list(self, tmp_path):
        feed = tmp_path / "feed.jsonl"
        write_jsonl(feed, [record(1, "A", "x", 0)])
        code = main([
            "ingest", "--store", str(tmp_path / "s"),
            "--topic", "t", "--keywords", " , ",
            "--input", str(feed),
        ])
        assert code == EXIT_USAGE

    def test_zero_shards_rejected(self, tmp_path):
        code = main([
            "ingest", "--store", str(tmp_path / "s"), "--shards", "0",
            "--topic", "t", "--keywords", "k", "--input", "feed.jsonl",
        ])
        assert code == EXIT_USAGE

    def test_bad_bucket_hours(self, tmp_path):
        code = main([
            "bucket", "--store", str(tmp_path / "s"),
            "--topic", "t", "--bucket-hours", "0",
        ])
        assert code == EXIT_USAGE


class TestIoErrors:
    def test_missing_input_file(self, tmp_path):
        code = main([
            "ingest", "--store", str(tmp_path / "s"),
            "--topic", "t", "--keywords", "k",
            "--input", str(tmp_path / "absent.jsonl"),
        ])
        assert code == EXIT_IO

    def test_unknown_topic(self, tmp_path):
        ShardStore.create(tmp_path / "s", shard_count=3).close()
        code = main([
            "bucket", "--store", str(tmp_path / "s"), "--topic", "never",
        ])
        assert code == EXIT_IO

    def test_unreadable_gexf(self, tmp_path):
        assert main(["metrics", "--in", str(tmp_path / "no.gexf")]) == EXIT_IO


class TestIngest:
    def test_counts_line(self, tmp_path, capsys):
        code, out = run_ingest(tmp_path, feed_records(), capsys)
        assert code == EXIT_OK
        assert "parsed=10 matched=8 stored=8 reordered=0 parse_errors=0" in out

    def test_empty_feed(self, tmp_path, capsys):
        code, out = run_ingest(tmp_path, [], capsys)
        assert code == EXIT_OK
        assert "parsed=0 matched=0 stored=0 reordered=0 parse_errors=0" in out

    def test_malformed_lines_counted(self, tmp_path, capsys):
        feed = tmp_path / "feed.jsonl"
        rows = [json.dumps(record(i, "A", "#mh370 x", i)) for i in range(4)]
        rows.insert(2, "{not json")
        feed.write_text("\n".join(rows) + "\n", encoding="utf-8")
        code = main([
            "ingest", "--store", str(tmp_path / "store"),
            "--topic", "mh370", "--keywords", "#mh370",
            "--input", str(feed),
        ])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "parsed=4" in out
        assert "parse_errors=1" in out

    def test_field_errors_counted(self, tmp_path, capsys):
        rows = feed_records()
        del rows[3]["user"]
        code, out = run_ingest(tmp_path, rows, capsys)
        assert code == EXIT_OK
        assert "parsed=9" in out
        assert "parse_errors=1" in out

    def test_counts_monotone(self, tmp_path, capsys):
        rows = feed_records()
        del rows[0]["created_at"]
        _, out = run_ingest(tmp_path, rows, capsys)
        stats = dict(
            part.split("=") for part in out.split() if "=" in part
        )
        parsed, matched = int(stats["parsed"]), int(stats["matched"])
        stored = int(stats["stored"])
        assert stored <= matched <= parsed

    def test_reingest_is_idempotent(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        run_ingest(tmp_path, feed_records(), capsys)
        code = main([
            "build", "--store", str(tmp_path / "store"),
            "--topic", "mh370", "--out", str(tmp_path / "g.gexf"),
        ])
        assert code == EXIT_OK
        graph, _ = parse_gexf((tmp_path / "g.gexf").read_text())
        # last-write-wins storage: re-ingest does not duplicate anything
        assert sum(1 for n in graph.nodes() if n.kind == "tweet") == 8


class TestChainedStages:
    def test_build_filter_metrics_layout(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        g = tmp_path / "full.gexf"
        f = tmp_path / "filtered.gexf"
        m = tmp_path / "metrics.csv"
        lay = tmp_path / "layout.csv"

        assert main([
            "build", "--store", str(tmp_path / "store"),
            "--topic", "mh370", "--out", str(g),
        ]) == EXIT_OK
        assert main([
            "filter", "--in", str(g), "--min-degree", "1", "--out", str(f),
        ]) == EXIT_OK
        assert main(["metrics", "--in", str(f), "--out", str(m)]) == EXIT_OK
        assert main([
            "layout", "--in", str(f), "--out", str(lay),
            "--iterations", "20", "--seed", "4",
        ]) == EXIT_OK

        full, _ = parse_gexf(g.read_text())
        kept, _ = parse_gexf(f.read_text())
        assert 0 < kept.node_count < full.node_count

        rows = list(csv.reader(io.StringIO(m.read_text())))
        assert rows[0] == [
            "node_id", "kind", "label", "in_deg", "out_deg",
            "betweenness", "closeness", "eigenvector",
        ]
        assert len(rows) == 1 + kept.node_count

        lay_rows = list(csv.reader(io.StringIO(lay.read_text())))
        assert lay_rows[0][-2:] == ["x", "y"]
        assert len(lay_rows) == len(rows)

    def test_build_window_restricts(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        out = tmp_path / "w.gexf"
        assert main([
            "build", "--store", str(tmp_path / "store"), "--topic", "mh370",
            "--bucket-start", "1970-01-01T00:00:00Z", "--bucket-hours", "1",
            "--out", str(out),
        ]) == EXIT_OK
        graph, _ = parse_gexf(out.read_text())
        # only tweets 101..103 fall inside [0, 3600)
        tweets = sorted(n.id for n in graph.nodes() if n.kind == "tweet")
        assert tweets == ["101", "102", "103"]

    def test_build_writes_stdout_by_default(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        assert main([
            "build", "--store", str(tmp_path / "store"), "--topic", "mh370",
        ]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith('<?xml version="1.0"')

    def test_export_signature_csv(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        assert main([
            "export", "--store", str(tmp_path / "store"), "--topic", "mh370",
            "--format", "csv", "--bucket-hours", "1",
        ]) == EXIT_OK
        out = capsys.readouterr().out
        header, *rows = [r for r in out.splitlines() if r]
        assert header == "bucket_start_iso,bucket_start_epoch,tweets,actors,mentions"
        assert sum(int(r.split(",")[2]) for r in rows) == 8

    def test_export_dynamic_id_labels(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        assert main([
            "export", "--store", str(tmp_path / "store"), "--topic", "mh370",
            "--format", "gexf", "--dynamic", "--labels", "id",
        ]) == EXIT_OK
        out = capsys.readouterr().out
        assert 'mode="dynamic"' in out
        assert 'label="101"' in out


class TestConfig:
    def test_config_supplies_defaults(self, tmp_path, capsys):
        feed = tmp_path / "feed.jsonl"
        write_jsonl(feed, feed_records())
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({
            "store_root": str(tmp_path / "store"),
            "topic": "mh370",
            "keywords": "#mh370",
            "input": str(feed),
        }))
        assert main(["ingest", "--config", str(config)]) == EXIT_OK
        assert "stored=8" in capsys.readouterr().out

    def test_flags_beat_config(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        g = tmp_path / "g.gexf"
        main(["build", "--store", str(tmp_path / "store"),
              "--topic", "mh370", "--out", str(g)])
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"min_degree": 99}))

        strict = tmp_path / "strict.gexf"
        main(["filter", "--config", str(config), "--in", str(g),
              "--out", str(strict)])
        loose = tmp_path / "loose.gexf"
        main(["filter", "--config", str(config), "--in", str(g),
              "--min-degree", "0", "--out", str(loose)])

        empty, _ = parse_gexf(strict.read_text())
        kept, _ = parse_gexf(loose.read_text())
        assert empty.node_count == 0
        assert kept.node_count > 0

    def test_config_must_be_json(self, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text("{oops")
        assert main(["bucket", "--config", str(config)]) == EXIT_USAGE

    def test_config_must_be_object(self, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text("[1, 2]")
        assert main(["bucket", "--config", str(config)]) == EXIT_USAGE

    def test_config_missing_file(self, tmp_path):
        assert main([
            "bucket", "--config", str(tmp_path / "no.json"),
        ]) == EXIT_IO


class TestPipeline:
    def test_single_tweet_end_to_end(self, tmp_path, capsys):
        feed = tmp_path / "feed.jsonl"
        write_jsonl(feed, [record(1, "UserA", "#mh370 @UserB @UserC", 100)])
        art = tmp_path / "artifacts"
        code = main([
            "pipeline", "--store", str(tmp_path / "store"),
            "--topic", "mh370", "--keywords", "#mh370",
            "--input", str(feed), "--out-dir", str(art),
            "--iterations", "10",
        ])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "buckets=1 exported=1 failures=0" in out

        gexf = art / "bucket-000000000000.gexf"
        graph, positions = parse_gexf(gexf.read_text())
        assert graph.node_count == 4
        assert graph.edge_count == 5
        assert user_key("UserA") in graph
        assert tweet_key("1") in graph
        assert len(positions) == 4
        assert (art / "bucket-000000000000.metrics.csv").exists()
        assert (art / "signature.csv").exists()

    def test_empty_input_header_only(self, tmp_path, capsys):
        feed = tmp_path / "feed.jsonl"
        feed.write_text("", encoding="utf-8")
        art = tmp_path / "artifacts"
        code = main([
            "pipeline", "--store", str(tmp_path / "store"),
            "--topic", "mh370", "--keywords", "#mh370",
            "--input", str(feed), "--out-dir", str(art),
        ])
        assert code == EXIT_OK
        assert "buckets=0 exported=0 failures=0" in capsys.readouterr().out
        signature = (art / "signature.csv").read_bytes()
        assert signature == (
            b"bucket_start_iso,bucket_start_epoch,tweets,actors,mentions\r\n"
        )
        assert not list(art.glob("bucket-*"))

    def test_partial_failure_exits_two(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        art = tmp_path / "artifacts"
        # squat on the first bucket's output path with a directory
        (art / "bucket-000000000000.gexf").mkdir(parents=True)
        code = main([
            "pipeline", "--store", str(tmp_path / "store"),
            "--topic", "mh370", "--out-dir", str(art),
            "--bucket-hours", "1", "--iterations", "5",
        ])
        assert code == EXIT_PARTIAL
        out = capsys.readouterr().out
        assert "buckets=3 exported=2 failures=1" in out
        assert (art / "signature.csv").exists()
        # the other buckets still came through
        assert (art / "bucket-000000003600.gexf").exists()
        assert (art / "bucket-000000007200.gexf").exists()

    def test_requires_out_dir(self, tmp_path, capsys):
        run_ingest(tmp_path, feed_records(), capsys)
        code = main([
            "pipeline", "--store", str(tmp_path / "store"), "--topic", "mh370",
        ])
        assert code == EXIT_USAGE

    def test_runs_were_deterministic(self, tmp_path, capsys):
        feed = tmp_path / "feed.jsonl"
        write_jsonl(feed, feed_records())
        outputs = []
        for name in ("a", "b"):
            art = tmp_path / name
            code = main([
                "pipeline", "--store", str(tmp_path / f"store_{name}"),
                "--topic", "mh370", "--keywords", "#mh370",
                "--input", str(feed), "--out-dir", str(art),
                "--iterations", "15", "--seed", "3",
            ])
            assert code == EXIT_OK
            capsys.readouterr()
            outputs.append({
                p.name: p.read_bytes() for p in sorted(art.iterdir())
            })
        assert outputs[0] == outputs[1]
