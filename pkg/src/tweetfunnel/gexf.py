"""GEXF serialization plus the activity-signature CSV writer.

The writer emits GEXF 1.2draft with a fixed element order (nodes sorted
by id, edges by (source, target, kind)) and no timestamps outside the
optional dynamics attributes, so two writes of one graph are
byte-identical. The reader exists for round-trip verification and for
re-importing previously exported networks.
"""

from __future__ import annotations

import csv
import io
import re
import xml.etree.ElementTree as ET
from datetime import datetime, timezone

from .errors import MalformedXml, MissingKindAttribute, UnknownNodeReference
from .graph import TWEET, USER, MultimodalGraph, NodeKey

GEXF_XMLNS = "http://www.gexf.net/1.2draft"
VIZ_XMLNS = "http://www.gexf.net/1.2draft/viz"

TWEET_LABEL_LIMIT = 120

# control characters and surrogates XML 1.0 cannot carry at all
_XML_INVALID_RE = re.compile(
    "[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff￾￿]"
)


def _escape(text: str) -> str:
    text = _XML_INVALID_RE.sub("", text)
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
        .replace("'", "&apos;")
    )


def _num(value: float) -> str:
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def node_id(key: NodeKey) -> str:
    prefix = "u" if key[0] == USER else "t"
    return f"{prefix}_{key[1]}"


def write_gexf(
    graph: MultimodalGraph,
    positions=None,
    dynamic: bool = False,
    label_mode: str = "text",
) -> str:
    """Serialize a graph to GEXF 1.2draft text.

    `positions` may be a LayoutResult or a plain key -> (x, y) dict; when
    given, viz position elements are emitted. `dynamic` adds start
    timestamps (node/edge first_seen). `label_mode` "id" replaces tweet
    text labels with the tweet id. Output bytes are a pure function of
    the arguments.
    """
    if label_mode not in ("text", "id"):
        raise ValueError(f"unknown label_mode {label_mode!r}")
    pos = getattr(positions, "positions", positions)

    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    xmlns = f'xmlns="{GEXF_XMLNS}"'
    if pos is not None:
        xmlns += f' xmlns:viz="{VIZ_XMLNS}"'
    lines.append(f'<gexf {xmlns} version="1.2draft">')
    mode = 'mode="dynamic" timeformat="double"' if dynamic else 'mode="static"'
    lines.append(f'  <graph defaultedgetype="directed" {mode}>')
    lines.append('    <attributes class="node">')
    lines.append('      <attribute id="0" title="kind" type="string"/>')
    lines.append('      <attribute id="1" title="is_retweet" type="boolean"/>')
    lines.append("    </attributes>")
    lines.append('    <attributes class="edge">')
    lines.append('      <attribute id="0" title="kind" type="string"/>')
    lines.append("    </attributes>")

    nodes = sorted(graph.nodes(), key=lambda node: node_id(node.key))
    if nodes:
        lines.append("    <nodes>")
        for node in nodes:
            label = node.label
            if node.kind == TWEET:
                if label_mode == "id":
                    label = node.id
                elif len(label) > TWEET_LABEL_LIMIT:
                    label = label[:TWEET_LABEL_LIMIT]
            start = f' start="{_num(node.first_seen)}"' if dynamic else ""
            lines.append(
                f'      <node id="{_escape(node_id(node.key))}" '
                f'label="{_escape(label)}"{start}>'
            )
            lines.append("        <attvalues>")
            lines.append(f'          <attvalue for="0" value="{_escape(node.kind)}"/>')
            flag = "true" if node.is_retweet else "false"
            lines.append(f'          <attvalue for="1" value="{flag}"/>')
            lines.append("        </attvalues>")
            if pos is not None and node.key in pos:
                x, y = pos[node.key]
                lines.append(
                    f'        <viz:position x="{_num(x)}" y="{_num(y)}" z="0"/>'
                )
            lines.append("      </node>")
        lines.append("    </nodes>")
    else:
        lines.append("    <nodes/>")

    edges = sorted(
        graph.edges(),
        key=lambda edge: (node_id(edge.source), node_id(edge.target), edge.kind),
    )
    if edges:
        lines.append("    <edges>")
        for i, edge in enumerate(edges):
            start = f' start="{_num(edge.first_seen)}"' if dynamic else ""
            lines.append(
                f'      <edge id="{i}" source="{_escape(node_id(edge.source))}" '
                f'target="{_escape(node_id(edge.target))}" '
                f'weight="{_num(edge.weight)}"{start}>'
            )
            lines.append("        <attvalues>")
            lines.append(f'          <attvalue for="0" value="{_escape(edge.kind)}"/>')
            lines.append("        </attvalues>")
            lines.append("      </edge>")
        lines.append("    </edges>")
    else:
        lines.append("    <edges/>")

    lines.append("  </graph>")
    lines.append("</gexf>")
    return "\n".join(lines) + "\n"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attvalues(element: ET.Element) -> dict[str, str]:
    values: dict[str, str] = {}
    for child in element.iter():
        if _local(child.tag) == "attvalue":
            values[child.get("for", "")] = child.get("value", "")
    return values


def _attribute_titles(root: ET.Element, cls: str) -> dict[str, str]:
    titles: dict[str, str] = {}
    for attrs in root.iter():
        if _local(attrs.tag) == "attributes" and attrs.get("class") == cls:
            for attr in attrs:
                if _local(attr.tag) == "attribute":
                    titles[attr.get("id", "")] = attr.get("title", "")
    return titles


def parse_gexf(document: str):
    """Rebuild a graph (and positions, when present) from GEXF text.

    Raises MalformedXml for unparseable input, UnknownNodeReference for
    edges naming undeclared nodes, MissingKindAttribute when a node or
    edge lacks its kind attvalue.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    node_titles = _attribute_titles(root, "node")
    edge_titles = _attribute_titles(root, "edge")

    graph = MultimodalGraph()
    positions: dict[NodeKey, tuple[float, float]] = {}
    ids: dict[str, NodeKey] = {}

    for element in root.iter():
        if _local(element.tag) != "node":
            continue
        raw_id = element.get("id", "")
        values = _attvalues(element)
        kind = None
        for attr_id, value in values.items():
            if node_titles.get(attr_id) == "kind":
                kind = value
        if kind is None:
            raise MissingKindAttribute(f"node {raw_id!r} has no kind attvalue")
        local_id = raw_id
        if kind == USER and raw_id.startswith("u_"):
            local_id = raw_id[2:]
        elif kind == TWEET and raw_id.startswith("t_"):
            local_id = raw_id[2:]
        key = (kind, local_id)
        is_retweet = False
        for attr_id, value in values.items():
            if node_titles.get(attr_id) == "is_retweet":
                is_retweet = value == "true"
        first_seen = float(element.get("start", 0.0))
        graph.ensure_node(key, element.get("label", ""), is_retweet, first_seen)
        ids[raw_id] = key
        for child in element.iter():
            if _local(child.tag) == "position":
                positions[key] = (
                    float(child.get("x", 0.0)),
                    float(child.get("y", 0.0)),
                )

    for element in root.iter():
        if _local(element.tag) != "edge":
            continue
        source_id = element.get("source", "")
        target_id = element.get("target", "")
        if source_id not in ids:
            raise UnknownNodeReference(f"edge names undeclared node {source_id!r}")
        if target_id not in ids:
            raise UnknownNodeReference(f"edge names undeclared node {target_id!r}")
        values = _attvalues(element)
        kind = None
        for attr_id, value in values.items():
            if edge_titles.get(attr_id) == "kind":
                kind = value
        if kind is None:
            raise MissingKindAttribute(
                f"edge {source_id!r} -> {target_id!r} has no kind attvalue"
            )
        weight = float(element.get("weight", 1.0))
        weight = int(weight) if weight.is_integer() else weight
        first_seen = float(element.get("start", 0.0))
        graph.add_edge_raw(ids[source_id], ids[target_id], kind, weight, first_seen)

    return graph, (positions or None)


def write_signature_csv(series) -> str:
    """Render a bucket series as CSV, one row per bucket in time order."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(
        ["bucket_start_iso", "bucket_start_epoch", "tweets", "actors", "mentions"]
    )
    for bucket in series.buckets:
        iso = datetime.fromtimestamp(bucket.start, tz=timezone.utc).strftime(
            "%Y-%m-%dT%H:%M:%SZ"
        )
        writer.writerow(
            [
                iso,
                _num(bucket.start),
                bucket.tweet_count,
                bucket.unique_actor_count,
                bucket.mention_edge_count,
            ]
        )
    return buffer.getvalue()
