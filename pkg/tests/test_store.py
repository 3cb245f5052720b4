import json
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tweetfunnel.errors import (
    InvalidRange,
    ShardCountMismatch,
    UnknownTopic,
    ZeroShards,
)
from tweetfunnel.store import Document, ShardStore, fnv1a64, route_key

from oracles import fnv1a64_reference


def doc(key, created_at, topic="t", **payload_extra):
    payload = {"tweet_id": key, "created_at": created_at, **payload_extra}
    return Document(key=key, topic=topic, payload=payload, stored_at=0.0)


class TestRouting:
    def test_known_hash_value(self):
        # FNV-1a 64 of "a", cross-checked against the byte-fold oracle
        assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a64(b"a") == fnv1a64_reference(b"a")

    def test_known_route(self):
        assert route_key("a", 3) == 0xAF63DC4C8601EC8C % 3 == 1

    @given(st.text(min_size=1, max_size=40), st.integers(min_value=1, max_value=16))
    def test_route_in_range_and_deterministic(self, key, shards):
        first = route_key(key, shards)
        assert 0 <= first < shards
        assert route_key(key, shards) == first

    @given(st.binary(max_size=64))
    def test_hash_matches_reference(self, data):
        assert fnv1a64(data) == fnv1a64_reference(data)

    def test_zero_shards_rejected(self):
        with pytest.raises(ZeroShards):
            route_key("a", 0)

    def test_empty_key_rejected(self):
        with pytest.raises(ValueError):
            route_key("", 3)


class TestLifecycle:
    def test_create_writes_manifest(self, tmp_path):
        store = ShardStore.create(tmp_path / "s", shard_count=5)
        store.close()
        manifest = json.loads((tmp_path / "s" / "manifest.json").read_text())
        assert manifest["shard_count"] == 5
        assert manifest["topics"] == []

    def test_open_reads_manifest(self, tmp_path):
        ShardStore.create(tmp_path / "s", shard_count=4).close()
        store = ShardStore.open(tmp_path / "s")
        assert store.config.shard_count == 4
        store.close()

    def test_open_conflicting_count(self, tmp_path):
        ShardStore.create(tmp_path / "s", shard_count=4).close()
        with pytest.raises(ShardCountMismatch):
            ShardStore.open(tmp_path / "s", shard_count=3)

    def test_open_or_create_both_ways(self, tmp_path):
        first = ShardStore.open_or_create(tmp_path / "s", shard_count=2)
        first.close()
        second = ShardStore.open_or_create(tmp_path / "s", shard_count=2)
        assert second.config.shard_count == 2
        second.close()

    def test_register_topic_idempotent(self, fresh_store):
        fresh_store.register_topic("mh370")
        fresh_store.register_topic("mh370")
        assert fresh_store.topics == {"mh370"}

    def test_unknown_topic(self, fresh_store):
        with pytest.raises(UnknownTopic):
            fresh_store.get_doc("ghost", "k")

    def test_context_manager(self, tmp_path):
        with ShardStore.create(tmp_path / "s") as store:
            store.register_topic("t")
        # reopen proves the manifest survived the close
        with ShardStore.open(tmp_path / "s") as store:
            assert store.topics == {"t"}


class TestDocuments:
    def test_put_get_round_trip(self, fresh_store):
        fresh_store.register_topic("t")
        fresh_store.put_doc("t", doc("k1", 100, text="hello"))
        got = fresh_store.get_doc("t", "k1")
        assert got is not None
        assert got.payload["text"] == "hello"
        assert got.created_at == 100

    def test_get_absent(self, fresh_store):
        fresh_store.register_topic("t")
        assert fresh_store.get_doc("t", "nope") is None

    def test_last_write_wins(self, fresh_store):
        fresh_store.register_topic("t")
        fresh_store.put_doc("t", doc("k", 100, version=1))
        fresh_store.put_doc("t", doc("k", 100, version=2))
        assert fresh_store.get_doc("t", "k").payload["version"] == 2
        assert [d.key for d in fresh_store.scan_collection("t")] == ["k"]

    def test_put_routes_by_key(self, fresh_store):
        fresh_store.register_topic("t")
        for i in range(30):
            key = f"key{i}"
            assert fresh_store.put_doc("t", doc(key, i)) == route_key(key, 3)

    def test_get_touches_exactly_one_shard(self, fresh_store):
        fresh_store.register_topic("t")
        for i in range(12):
            fresh_store.put_doc("t", doc(f"key{i}", i))
        before = fresh_store.shard_access_counts("t")
        fresh_store.get_doc("t", "key7")
        after = fresh_store.shard_access_counts("t")
        bumps = [b - a for a, b in zip(before, after)]
        assert sorted(bumps) == [0, 0, 1]

    def test_persistence_across_reopen(self, tmp_path):
        with ShardStore.create(tmp_path / "s", shard_count=3) as store:
            store.register_topic("t")
            store.put_doc("t", doc("k", 55, body="kept"))
        with ShardStore.open(tmp_path / "s") as store:
            assert store.get_doc("t", "k").payload["body"] == "kept"


class TestScan:
    def test_empty_topic(self, fresh_store):
        fresh_store.register_topic("t")
        assert list(fresh_store.scan_collection("t")) == []

    def test_ordered_by_created_at_then_key(self, fresh_store):
        fresh_store.register_topic("t")
        for key, ts in [("b", 30), ("a", 30), ("z", 10), ("m", 20)]:
            fresh_store.put_doc("t", doc(key, ts))
        got = [(d.created_at, d.key) for d in fresh_store.scan_collection("t")]
        assert got == [(10, "z"), (20, "m"), (30, "a"), (30, "b")]

    def test_time_range_half_open(self, fresh_store):
        fresh_store.register_topic("t")
        for i in range(10):
            fresh_store.put_doc("t", doc(f"k{i}", i * 10))
        got = [d.created_at for d in fresh_store.scan_collection("t", (20, 50))]
        assert got == [20, 30, 40]

    def test_invalid_range(self, fresh_store):
        fresh_store.register_topic("t")
        with pytest.raises(InvalidRange):
            list(fresh_store.scan_collection("t", (5, 5)))

    def test_torn_tail_skipped_and_counted(self, tmp_path):
        with ShardStore.create(tmp_path / "s", shard_count=1) as store:
            store.register_topic("t")
            store.put_doc("t", doc("k1", 1))
            store.put_doc("t", doc("k2", 2))
        shard_file = tmp_path / "s" / "t" / "shard-0.jsonl"
        data = shard_file.read_bytes()
        shard_file.write_bytes(data[:-9])  # tear the final record
        with ShardStore.open(tmp_path / "s") as store:
            docs = list(store.scan_collection("t"))
            assert [d.key for d in docs] == ["k1"]
            assert store.skipped_record_count("t") == 1

    def test_concurrent_puts_all_land(self, fresh_store):
        fresh_store.register_topic("t")

        def put_range(base):
            for i in range(50):
                fresh_store.put_doc("t", doc(f"k{base}-{i}", base + i))

        threads = [threading.Thread(target=put_range, args=(b,)) for b in (0, 100, 200, 300)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert len(list(fresh_store.scan_collection("t"))) == 200


def test_shard_sizes_roughly_balanced(fresh_store):
    fresh_store.register_topic("t")
    for i in range(3000):
        fresh_store.put_doc("t", doc(f"key-{i}", i))
    sizes = fresh_store.shard_sizes("t")
    assert sum(sizes) == 3000
    for size in sizes:
        assert abs(size / 3000 - 1 / 3) < 0.05
