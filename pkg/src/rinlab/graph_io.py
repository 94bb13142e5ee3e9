"""Graph export (JSON / GraphML) and JSON re-import.

Exports are bit-reproducible: identical inputs produce identical bytes.
"""
from __future__ import annotations

import json
from enum import Enum
from xml.sax.saxutils import quoteattr

import numpy as np

from .errors import IoError, SchemaViolation
from .rin import DistanceCriterion, Rin, RinConfig, _assemble


class GraphFormat(Enum):
    JSON_GRAPH = "json"
    GRAPHML = "graphml"


def graph_json(rin: Rin) -> str:
    doc = {
        "n": rin.node_count,
        "edges": [[int(i), int(j)] for i, j in zip(rin.edges_i, rin.edges_j)],
        "config": {
            "criterion": rin.config.criterion.value,
            "cutoff": rin.config.cutoff,
            "exclude_backbone_neighbors": rin.config.exclude_backbone_neighbors,
        },
        "frame": rin.frame_index,
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def graphml(rin: Rin) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns"',
        '         xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"',
        '         xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns'
        ' http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">',
        '  <key id="criterion" for="graph" attr.name="criterion" attr.type="string"/>',
        '  <key id="cutoff" for="graph" attr.name="cutoff" attr.type="double"/>',
        '  <key id="frame" for="graph" attr.name="frame" attr.type="int"/>',
        '  <graph id="rin" edgedefault="undirected">',
        f'    <data key="criterion">{rin.config.criterion.value}</data>',
        f'    <data key="cutoff">{rin.config.cutoff!r}</data>',
        f'    <data key="frame">{rin.frame_index}</data>',
    ]
    for i in range(rin.node_count):
        lines.append(f'    <node id="n{i}"/>')
    for i, j in zip(rin.edges_i, rin.edges_j):
        lines.append(f'    <edge source={quoteattr(f"n{i}")} target={quoteattr(f"n{j}")}/>')
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def export_graph(rin: Rin, fmt: GraphFormat, sink) -> None:
    """Write the RIN to a path or file object in the requested format."""
    text = graph_json(rin) if fmt is GraphFormat.JSON_GRAPH else graphml(rin)
    try:
        if hasattr(sink, "write"):
            sink.write(text)
        else:
            with open(sink, "w", encoding="utf-8") as fh:
                fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write graph: {exc}") from None


def load_graph_json(data: bytes | str) -> Rin:
    """Re-import an exported JSON graph.

    The wire format carries no distances, so the result supports analytics and
    layout but not incremental cutoff updates (edge distances are NaN).
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "expected object")
    n = doc.get("n")
    if not isinstance(n, int) or n < 0:
        raise SchemaViolation("n", "expected a non-negative integer")
    edges = doc.get("edges")
    if not isinstance(edges, list):
        raise SchemaViolation("edges", "expected an array")
    ei = np.empty(len(edges), dtype=np.int32)
    ej = np.empty(len(edges), dtype=np.int32)
    for k, pair in enumerate(edges):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, int) for v in pair)
        ):
            raise SchemaViolation(f"edges[{k}]", "expected [i, j] integers")
        i, j = pair
        if not (0 <= i < n and 0 <= j < n and i != j):
            raise SchemaViolation(f"edges[{k}]", f"pair out of range for n={n}")
        ei[k], ej[k] = min(i, j), max(i, j)
    cfg = doc.get("config") or {}
    try:
        config = RinConfig(
            DistanceCriterion(cfg.get("criterion", "min")),
            float(cfg.get("cutoff", 1.0)),
            bool(cfg.get("exclude_backbone_neighbors", False)),
        )
    except ValueError as exc:
        raise SchemaViolation("config", str(exc)) from None
    if len(ei):
        keys = np.unique(ei.astype(np.int64) * n + ej)
        ei = (keys // n).astype(np.int32)
        ej = (keys % n).astype(np.int32)
    d2 = np.full(len(ei), np.nan)
    return _assemble(n, ei, ej, d2, config, int(doc.get("frame", 0)))
