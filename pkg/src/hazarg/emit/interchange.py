"""Canonical JSON interchange for safety cases.

Keys are sorted and every field is always present, so two equal cases
serialise to the same bytes. Module and node order is kept as built.
"""

from __future__ import annotations

import json
from typing import Any

from ..errors import ParseError
from ..gsn import EdgeKind, GsnEdge, GsnGraph, GsnNode, NodeKind, SafetyCase

FORMAT = "hazarg-interchange"
VERSION = "1"


def _node(node: GsnNode) -> dict[str, Any]:
    return {
        "id": node.id,
        "kind": node.kind.value,
        "text": node.text,
        "developed": node.developed,
        "paper_tag": node.paper_tag,
        "source_ref": node.source_ref,
        "target": list(node.target) if node.target else None,
    }


def to_interchange_data(case: SafetyCase) -> dict[str, Any]:
    modules = []
    for module_id, graph in case.modules.items():
        modules.append(
            {
                "id": module_id,
                "root": graph.root,
                "nodes": [_node(n) for n in graph.nodes.values()],
                "edges": [{"from": e.src, "to": e.dst, "kind": e.kind.value} for e in graph.edges],
            }
        )
    return {
        "format": FORMAT,
        "version": VERSION,
        "meta": case.meta,
        "modules": modules,
        "trace": {k: list(v) for k, v in case.trace.items()},
    }


def to_interchange(case: SafetyCase) -> str:
    return json.dumps(to_interchange_data(case), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def from_interchange(text: str, source: str | None = None) -> SafetyCase:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("syntax-error", exc.msg, source=source, line=exc.lineno, column=exc.colno) from None
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise ParseError("bad-value", "not a hazarg interchange document", source=source)
    if data.get("version") != VERSION:
        raise ParseError("bad-value", f"unsupported interchange version {data.get('version')!r}", source=source)
    try:
        modules = {}
        for module in data["modules"]:
            nodes = {}
            for n in module["nodes"]:
                nodes[n["id"]] = GsnNode(
                    id=n["id"],
                    kind=NodeKind(n["kind"]),
                    text=n["text"],
                    developed=bool(n["developed"]),
                    source_ref=n["source_ref"],
                    paper_tag=n["paper_tag"],
                    target=tuple(n["target"]) if n["target"] else None,  # type: ignore[arg-type]
                )
            edges = tuple(GsnEdge(e["from"], e["to"], EdgeKind(e["kind"])) for e in module["edges"])
            modules[module["id"]] = GsnGraph(nodes=nodes, edges=edges, root=module["root"])
        trace = {k: tuple(v) for k, v in data["trace"].items()}
        meta = data["meta"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("bad-value", f"malformed interchange document: {exc}", source=source) from None
    return SafetyCase(modules=modules, trace=trace, meta=meta)
