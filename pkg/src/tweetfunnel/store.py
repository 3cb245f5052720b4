"""Hash-routed, append-only document store partitioned into local shards.

Each topic keeps one JSON-lines segment file per shard; a manifest at the
root pins the shard count so a store is never silently reinterpreted.
Writes append and flush per record; duplicate keys resolve last-write-wins
at read time via the in-memory key index rebuilt on open.
"""

from __future__ import annotations

import heapq
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator

from .errors import (
    InvalidRange,
    IOFailure,
    ShardCountMismatch,
    UnknownTopic,
    ZeroShards,
)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

MANIFEST_NAME = "manifest.json"


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash; stable across runs and platforms."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def route_key(key: str, shard_count: int) -> int:
    """Map a document key to its shard index."""
    if shard_count < 1:
        raise ZeroShards(f"shard_count must be >= 1, got {shard_count}")
    if not key:
        raise ValueError("key must be non-empty")
    return fnv1a64(key.encode("utf-8")) % shard_count


@dataclass
class ShardConfig:
    shard_count: int
    root_path: Path
    topic_registry: set[str]


@dataclass
class Document:
    """A stored record: one cleaned tweet keyed by tweet id."""

    key: str
    topic: str
    payload: dict[str, Any]
    stored_at: float

    @property
    def created_at(self) -> float:
        return self.payload["created_at"]


class _Shard:
    """One segment file plus its lazily built key index."""

    def __init__(self, path: Path):
        self.path = path
        self.lock = threading.Lock()
        self.index: dict[str, Document] | None = None
        self.access_count = 0
        self.skipped_records = 0
        self._writer = None

    def _build_index(self) -> None:
        index: dict[str, Document] = {}
        self.skipped_records = 0
        if self.path.exists():
            with open(self.path, "rb") as fh:
                lines = fh.read().split(b"\n")
            for line in lines:
                if not line:
                    continue
                # A line that does not decode is a torn record (typically the
                # tail of an interrupted write): skip it, keep the rest.
                try:
                    rec = json.loads(line)
                    doc = Document(
                        key=rec["key"],
                        topic=rec["topic"],
                        payload=rec["payload"],
                        stored_at=rec["stored_at"],
                    )
                except (json.JSONDecodeError, KeyError, TypeError):
                    self.skipped_records += 1
                    continue
                index[doc.key] = doc
        self.index = index

    def ensure_index(self) -> dict[str, Document]:
        if self.index is None:
            self._build_index()
        return self.index

    def lookup(self, key: str) -> Document | None:
        with self.lock:
            self.access_count += 1
            return self.ensure_index().get(key)

    def append(self, doc: Document) -> None:
        line = json.dumps(
            {
                "key": doc.key,
                "topic": doc.topic,
                "payload": doc.payload,
                "stored_at": doc.stored_at,
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )
        with self.lock:
            self.access_count += 1
            try:
                if self._writer is None:
                    self.path.parent.mkdir(parents=True, exist_ok=True)
                    self._writer = open(self.path, "a", encoding="utf-8", newline="\n")
                self._writer.write(line + "\n")
                self._writer.flush()
            except OSError as exc:
                raise IOFailure(f"append to {self.path} failed: {exc}") from exc
            if self.index is not None:
                self.index[doc.key] = doc

    def snapshot(self) -> list[Document]:
        with self.lock:
            self.access_count += 1
            return list(self.ensure_index().values())

    def close(self) -> None:
        with self.lock:
            if self._writer is not None:
                self._writer.close()
                self._writer = None


class ShardStore:
    """Topic-partitioned document store over N hash-routed shards."""

    def __init__(self, root: str | Path, shard_count: int, topics: set[str]):
        self.root = Path(root)
        if shard_count < 1:
            raise ZeroShards(f"shard_count must be >= 1, got {shard_count}")
        self.shard_count = shard_count
        self._topics = set(topics)
        self._shards: dict[str, list[_Shard]] = {}
        self._manifest_lock = threading.Lock()

    # -- lifecycle -----------------------------------------------------

    @classmethod
    def create(cls, root: str | Path, shard_count: int = 3) -> "ShardStore":
        store = cls(root, shard_count, set())
        store.root.mkdir(parents=True, exist_ok=True)
        store._write_manifest()
        return store

    @classmethod
    def open(cls, root: str | Path, shard_count: int | None = None) -> "ShardStore":
        root = Path(root)
        manifest_path = root / MANIFEST_NAME
        try:
            with open(manifest_path, encoding="utf-8") as fh:
                manifest = json.load(fh)
        except OSError as exc:
            raise IOFailure(f"cannot read manifest at {manifest_path}: {exc}") from exc
        stored_count = int(manifest["shard_count"])
        if shard_count is not None and shard_count != stored_count:
            raise ShardCountMismatch(
                f"store at {root} has shard_count={stored_count}, "
                f"asked to open with {shard_count}; re-shard explicitly instead"
            )
        return cls(root, stored_count, set(manifest.get("topics", [])))

    @classmethod
    def open_or_create(cls, root: str | Path, shard_count: int = 3) -> "ShardStore":
        if (Path(root) / MANIFEST_NAME).exists():
            return cls.open(root, shard_count)
        return cls.create(root, shard_count)

    def close(self) -> None:
        for shards in self._shards.values():
            for shard in shards:
                shard.close()

    def __enter__(self) -> "ShardStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def config(self) -> ShardConfig:
        return ShardConfig(self.shard_count, self.root, set(self._topics))

    @property
    def topics(self) -> set[str]:
        return set(self._topics)

    def _write_manifest(self) -> None:
        manifest = {"shard_count": self.shard_count, "topics": sorted(self._topics)}
        tmp = self.root / (MANIFEST_NAME + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(manifest, fh)
            os.replace(tmp, self.root / MANIFEST_NAME)
        except OSError as exc:
            raise IOFailure(f"cannot write manifest under {self.root}: {exc}") from exc

    # -- topics ----------------------------------------------------------

    def register_topic(self, name: str) -> None:
        with self._manifest_lock:
            if name not in self._topics:
                self._topics.add(name)
                self._write_manifest()

    def _topic_shards(self, topic: str) -> list[_Shard]:
        if topic not in self._topics:
            raise UnknownTopic(f"topic {topic!r} is not registered")
        if topic not in self._shards:
            topic_dir = self.root / topic
            self._shards[topic] = [
                _Shard(topic_dir / f"shard-{k}.jsonl") for k in range(self.shard_count)
            ]
        return self._shards[topic]

    # -- documents ---------------------------------------------------------

    def put_doc(self, topic: str, doc: Document) -> int:
        """Durably append a document; returns the shard index written."""
        if not doc.key:
            raise ValueError("document key must be non-empty")
        shards = self._topic_shards(topic)
        idx = route_key(doc.key, self.shard_count)
        shards[idx].append(doc)
        return idx

    def get_doc(self, topic: str, key: str) -> Document | None:
        """Latest document for key, or None; touches exactly one shard."""
        shards = self._topic_shards(topic)
        return shards[route_key(key, self.shard_count)].lookup(key)

    def scan_collection(
        self, topic: str, time_range: tuple[float, float] | None = None
    ) -> Iterator[Document]:
        """Yield latest document versions ordered by (created_at, key).

        The scan sees every put acknowledged before it starts; concurrent
        puts may or may not appear.
        """
        if time_range is not None:
            t0, t1 = time_range
            if not t0 < t1:
                raise InvalidRange(f"empty time range [{t0}, {t1})")
        shards = self._topic_shards(topic)
        batches = []
        for shard in shards:
            docs = shard.snapshot()
            if time_range is not None:
                t0, t1 = time_range
                docs = [d for d in docs if t0 <= d.created_at < t1]
            docs.sort(key=lambda d: (d.created_at, d.key))
            batches.append(docs)
        yield from heapq.merge(*batches, key=lambda d: (d.created_at, d.key))

    def skipped_record_count(self, topic: str) -> int:
        """Partial/torn records skipped while indexing this topic's shards."""
        return sum(s.skipped_records for s in self._topic_shards(topic))

    def shard_access_counts(self, topic: str) -> list[int]:
        return [s.access_count for s in self._topic_shards(topic)]

    def shard_sizes(self, topic: str) -> list[int]:
        """Documents per shard (latest versions), for balance checks."""
        return [len(s.snapshot()) for s in self._topic_shards(topic)]
