"""Parse, filter, and clean raw tweet records; replay recorded streams.

Input records are JSON-like dicts, one tweet per record, either flat
(canonical field names) or with the nested "user" object layout that
Twitter-style dumps use. Cleaning makes text safe to embed in XML
character data; mention extraction feeds the graph builder downstream.
"""

from __future__ import annotations

import json
import math
import re
import time
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Callable, Iterable, Iterator

from .errors import (
    EmptyKeywordList,
    MalformedTimestamp,
    MissingField,
    SourceUnreadable,
)

# Handles: 1-15 chars of [A-Za-z0-9_]; a mention's "@" must not be glued to a
# preceding word character (rules out e-mail addresses).
HANDLE_RE = re.compile(r"^[A-Za-z0-9_]{1,15}$")
MENTION_RE = re.compile(r"(?<![A-Za-z0-9_])@([A-Za-z0-9_]{1,15})")
_RETWEET_RE = re.compile(r"RT @[A-Za-z0-9_]")
_TOPIC_NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")

_SPACE_RUN_RE = re.compile(r" {2,}")
# Escape "&" only when it does not already start one of the five predefined
# entities, so cleaning is idempotent.
_AMP_RE = re.compile(r"&(?!(?:amp|lt|gt|quot|apos);)")
# Codepoints XML 1.0 cannot carry at all (most C0 controls, surrogates,
# U+FFFE/U+FFFF) are dropped; CR/LF/TAB are handled separately as whitespace.
_XML_INVALID_RE = re.compile(
    "[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff￾￿]"
)

_TWITTER_TIME_FORMAT = "%a %b %d %H:%M:%S %z %Y"


@dataclass
class RawTweet:
    """One social-media message as received, before cleaning."""

    tweet_id: str
    author_handle: str
    text: str
    created_at: float
    author_id: str | None = None
    followers_count: int = 0
    friends_count: int = 0
    favourites_count: int = 0
    statuses_count: int = 0
    time_zone: str | None = None
    geo: tuple[float, float] | None = None
    place: str | None = None
    country: str | None = None

    def to_record(self) -> dict[str, Any]:
        """Serialize to the canonical flat record accepted by parse_tweet."""
        return {
            "tweet_id": self.tweet_id,
            "author_handle": self.author_handle,
            "author_id": self.author_id,
            "text": self.text,
            "created_at": self.created_at,
            "followers_count": self.followers_count,
            "friends_count": self.friends_count,
            "favourites_count": self.favourites_count,
            "statuses_count": self.statuses_count,
            "time_zone": self.time_zone,
            "geo": list(self.geo) if self.geo is not None else None,
            "place": self.place,
            "country": self.country,
        }


@dataclass
class CleanTweet(RawTweet):
    """A tweet after cleaning: XML-safe text plus extracted structure."""

    mentions: list[str] = field(default_factory=list)
    is_retweet: bool = False

    def to_payload(self) -> dict[str, Any]:
        rec = self.to_record()
        rec["mentions"] = list(self.mentions)
        rec["is_retweet"] = self.is_retweet
        return rec

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> "CleanTweet":
        geo = payload.get("geo")
        return cls(
            tweet_id=payload["tweet_id"],
            author_handle=payload["author_handle"],
            text=payload["text"],
            created_at=payload["created_at"],
            author_id=payload.get("author_id"),
            followers_count=payload.get("followers_count", 0),
            friends_count=payload.get("friends_count", 0),
            favourites_count=payload.get("favourites_count", 0),
            statuses_count=payload.get("statuses_count", 0),
            time_zone=payload.get("time_zone"),
            geo=tuple(geo) if geo is not None else None,
            place=payload.get("place"),
            country=payload.get("country"),
            mentions=list(payload.get("mentions", [])),
            is_retweet=bool(payload.get("is_retweet", False)),
        )


@dataclass
class Topic:
    """A named collection selected by keyword filters."""

    name: str
    keywords: list[str]

    def __post_init__(self):
        if not _TOPIC_NAME_RE.match(self.name):
            raise ValueError(f"topic name not usable as an identifier: {self.name!r}")
        if not self.keywords:
            raise EmptyKeywordList(f"topic {self.name!r} has no keywords")


def _parse_timestamp(value: Any) -> float:
    if isinstance(value, bool):
        raise MalformedTimestamp(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        ts = float(value)
    elif isinstance(value, str):
        try:
            ts = float(value)
        except ValueError:
            ts = None
        if ts is None:
            for parser in (
                lambda s: datetime.fromisoformat(s.replace("Z", "+00:00")).timestamp(),
                lambda s: datetime.strptime(s, _TWITTER_TIME_FORMAT).timestamp(),
            ):
                try:
                    ts = parser(value)
                    break
                except ValueError:
                    continue
            if ts is None:
                raise MalformedTimestamp(f"unparseable created_at: {value!r}")
    else:
        raise MalformedTimestamp(f"unparseable created_at: {value!r}")
    if not math.isfinite(ts) or ts < 0:
        raise MalformedTimestamp(f"created_at out of range: {value!r}")
    # Keep integral timestamps as ints so records round-trip through JSON.
    if isinstance(value, int) or (isinstance(ts, float) and ts.is_integer()):
        return int(ts)
    return ts


def _first_present(record: dict, *names: str) -> Any:
    for name in names:
        value = record.get(name)
        if value is not None:
            return value
    return None


def _as_int(value: Any) -> int:
    try:
        n = int(value)
    except (TypeError, ValueError):
        return 0
    return max(n, 0)


def _parse_geo(value: Any) -> tuple[float, float] | None:
    if value is None:
        return None
    if isinstance(value, dict):
        if "lat" in value and "lon" in value:
            return (float(value["lat"]), float(value["lon"]))
        coords = value.get("coordinates")
        if isinstance(coords, (list, tuple)) and len(coords) == 2:
            return (float(coords[0]), float(coords[1]))
        return None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return (float(value[0]), float(value[1]))
    return None


def parse_tweet(record: dict[str, Any]) -> RawTweet:
    """Turn a key-value document into a RawTweet.

    Accepts canonical flat field names, common aliases (id/id_str), and the
    nested "user" object layout (user.screen_name, user.id_str, user counts).
    Unknown extra fields are ignored. Raises MissingField for an absent
    required field and MalformedTimestamp for an unparseable created_at.
    """
    if not isinstance(record, dict):
        raise MissingField("tweet_id")
    user = record.get("user")
    user_obj = user if isinstance(user, dict) else {}

    tweet_id = _first_present(record, "tweet_id", "id", "id_str")
    if tweet_id is None or str(tweet_id) == "":
        raise MissingField("tweet_id")

    handle = _first_present(record, "author_handle", "screen_name")
    if handle is None:
        if isinstance(user, str):
            handle = user
        else:
            handle = user_obj.get("screen_name")
    if handle is None or not isinstance(handle, str) or handle.lstrip("@") == "":
        raise MissingField("author_handle")
    handle = handle.lstrip("@")

    text = record.get("text")
    if text is None:
        raise MissingField("text")
    if not isinstance(text, str):
        text = str(text)

    created_raw = record.get("created_at")
    if created_raw is None:
        raise MissingField("created_at")
    created_at = _parse_timestamp(created_raw)

    author_id = _first_present(record, "author_id", "user_id")
    if author_id is None:
        author_id = _first_present(user_obj, "id_str", "id")
    if author_id is not None:
        author_id = str(author_id)

    def count(name: str) -> int:
        value = record.get(name)
        if value is None:
            value = user_obj.get(name)
        return _as_int(value)

    place = record.get("place")
    country = record.get("country")
    if isinstance(place, dict):
        country = country or place.get("country")
        place = place.get("full_name") or place.get("name")

    return RawTweet(
        tweet_id=str(tweet_id),
        author_handle=handle,
        text=text,
        created_at=created_at,
        author_id=author_id,
        followers_count=count("followers_count"),
        friends_count=count("friends_count"),
        favourites_count=count("favourites_count"),
        statuses_count=count("statuses_count"),
        time_zone=record.get("time_zone") or user_obj.get("time_zone"),
        geo=_parse_geo(record.get("geo")),
        place=place if isinstance(place, str) else None,
        country=country if isinstance(country, str) else None,
    )


def clean_text(text: str) -> str:
    """Normalize whitespace and escape XML metacharacters.

    CR/LF/TAB each become one space, space runs collapse, ends are trimmed,
    and the five XML 1.0 entities are applied (ampersand first, guarded so
    the function is idempotent). Codepoints XML cannot represent are dropped;
    everything else is preserved verbatim.
    """
    text = _XML_INVALID_RE.sub("", text)
    text = text.replace("\r", " ").replace("\n", " ").replace("\t", " ")
    text = _SPACE_RUN_RE.sub(" ", text).strip(" ")
    text = _AMP_RE.sub("&amp;", text)
    text = text.replace("<", "&lt;").replace(">", "&gt;")
    text = text.replace('"', "&quot;").replace("'", "&apos;")
    return text


def extract_mentions(text: str, author_handle: str) -> list[str]:
    """List mentioned handles in first-occurrence order.

    Duplicates are dropped case-insensitively (first casing kept) and the
    author's own handle never appears. Operates on raw, pre-cleaning text.
    """
    author = author_handle.casefold()
    seen: set[str] = set()
    mentions: list[str] = []
    for match in MENTION_RE.finditer(text):
        handle = match.group(1)
        folded = handle.casefold()
        if folded == author or folded in seen:
            continue
        seen.add(folded)
        mentions.append(handle)
    return mentions


def detect_retweet(text: str) -> bool:
    """True iff the raw text starts with "RT " plus a mention token."""
    return _RETWEET_RE.match(text) is not None


def topic_match(tweet: RawTweet, topic: Topic) -> bool:
    """True iff any topic keyword occurs case-insensitively in the text.

    Matching is substring-based; a single leading "#" on the keyword is
    ignored so hashtag-named topics match both tagged and untagged uses.
    """
    if not topic.keywords:
        raise EmptyKeywordList(f"topic {topic.name!r} has no keywords")
    haystack = tweet.text.casefold()
    for keyword in topic.keywords:
        needle = keyword[1:] if keyword.startswith("#") else keyword
        if needle and needle.casefold() in haystack:
            return True
    return False


def clean_tweet(raw: RawTweet) -> CleanTweet:
    """Derive the stored form: cleaned text, mentions, retweet flag."""
    return CleanTweet(
        tweet_id=raw.tweet_id,
        author_handle=raw.author_handle,
        text=clean_text(raw.text),
        created_at=raw.created_at,
        author_id=raw.author_id,
        followers_count=raw.followers_count,
        friends_count=raw.friends_count,
        favourites_count=raw.favourites_count,
        statuses_count=raw.statuses_count,
        time_zone=raw.time_zone,
        geo=raw.geo,
        place=raw.place,
        country=raw.country,
        mentions=extract_mentions(raw.text, raw.author_handle),
        is_retweet=detect_retweet(raw.text),
    )


class StreamReplay:
    """Re-emit recorded tweets in order, honouring original pacing.

    speed > 0 sleeps (delta created_at)/speed between emissions; speed = 0
    emits as fast as possible. Timestamp regressions emit immediately and
    bump the reordered counter. Records failing to parse are skipped and
    counted. If the underlying source raises mid-stream, tweets already
    emitted stand and SourceUnreadable is raised.
    """

    def __init__(
        self,
        source: Iterable[dict | RawTweet],
        speed: float = 0.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if speed < 0:
            raise ValueError("speed must be >= 0")
        self.source = source
        self.speed = speed
        self.emitted = 0
        self.reordered = 0
        self.parse_errors = 0
        self._sleep = sleep

    def __iter__(self) -> Iterator[RawTweet]:
        watermark: float | None = None
        iterator = iter(self.source)
        while True:
            try:
                record = next(iterator)
            except StopIteration:
                return
            except Exception as exc:
                raise SourceUnreadable(f"stream source failed: {exc}") from exc
            if isinstance(record, RawTweet):
                tweet = record
            else:
                try:
                    tweet = parse_tweet(record)
                except (MissingField, MalformedTimestamp):
                    self.parse_errors += 1
                    continue
            if watermark is not None:
                delta = tweet.created_at - watermark
                if delta < 0:
                    self.reordered += 1
                elif delta > 0 and self.speed > 0:
                    self._sleep(delta / self.speed)
            watermark = tweet.created_at if watermark is None else max(watermark, tweet.created_at)
            self.emitted += 1
            yield tweet


def replay_stream(
    source: Iterable[dict | RawTweet],
    speed: float = 0.0,
    sleep: Callable[[float], None] = time.sleep,
) -> StreamReplay:
    return StreamReplay(source, speed=speed, sleep=sleep)


def iter_records(
    lines: Iterable[str | bytes],
    on_error: Callable[[str | bytes, Exception], None] | None = None,
) -> Iterator[dict]:
    """Decode JSON-lines input, skipping blank and malformed lines.

    on_error is invoked once per malformed line; counting is the caller's
    concern (the CLI keeps the skip-and-count totals).
    """
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        try:
            record = json.loads(stripped)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            if on_error is not None:
                on_error(line, exc)
            continue
        if isinstance(record, dict):
            yield record
        elif on_error is not None:
            on_error(line, ValueError("JSON line is not an object"))
