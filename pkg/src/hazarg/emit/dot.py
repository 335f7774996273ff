"""Graphviz rendering following the usual GSN shape conventions.

Legend: Goal = box, Strategy = parallelogram, Solution = circle,
Context = rounded box, Assumption / Justification = ellipse marked "A" /
"J", away goal and module reference = tab (folder) shape naming the target
module. Undeveloped goals and strategies carry a "◇" marker. SupportedBy
edges have filled arrowheads, InContextOf edges hollow ones.
"""

from __future__ import annotations

import string
import textwrap
from collections import defaultdict

from ..gsn import EdgeKind, GsnGraph, GsnNode, NodeKind, SafetyCase

UNDEVELOPED_MARK = "◇"
WRAP = 36

SHAPES = {
    NodeKind.GOAL: 'shape=box',
    NodeKind.STRATEGY: 'shape=parallelogram',
    NodeKind.SOLUTION: 'shape=circle',
    NodeKind.CONTEXT: 'shape=box, style=rounded',
    NodeKind.ASSUMPTION: 'shape=ellipse, xlabel="A"',
    NodeKind.JUSTIFICATION: 'shape=ellipse, xlabel="J"',
    NodeKind.AWAY_GOAL: 'shape=tab',
    NodeKind.MODULE_REF: 'shape=tab',
}
ARROWS = {EdgeKind.SUPPORTED_BY: "arrowhead=normal", EdgeKind.IN_CONTEXT_OF: "arrowhead=empty"}


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def display_tags(graph: GsnGraph) -> dict[str, str]:
    """Tags with a/b/... appended where one parent has several same-tag children."""
    tags = {n.id: n.paper_tag or "" for n in graph}
    siblings: dict[tuple[str, str], list[str]] = defaultdict(list)
    for edge in graph.edges:
        if edge.kind is EdgeKind.SUPPORTED_BY and tags.get(edge.dst):
            siblings[(edge.src, tags[edge.dst])].append(edge.dst)
    out = dict(tags)
    for (_, tag), children in siblings.items():
        if len(children) > 1:
            for letter, child in zip(string.ascii_lowercase, children):
                out[child] = tag + letter
    return out


def _label(node: GsnNode, tag: str) -> str:
    lines = [tag] if tag else []
    lines.extend(textwrap.wrap(node.text, WRAP) or [node.text])
    if node.target is not None:
        lines.append(f"[{node.target[0]}]")
    return "\n".join(lines)


def _node_stmt(node: GsnNode, tag: str, indent: str) -> str:
    attrs = [SHAPES[node.kind], f"label={quote(_label(node, tag))}"]
    if not node.developed:
        attrs.append(f'xlabel="{UNDEVELOPED_MARK}"')
    return f"{indent}{quote(node.id)} [{', '.join(attrs)}];"


def to_dot(case: SafetyCase, per_module: bool = True) -> str:
    """DOT text with one statement per node and per edge.

    ``per_module`` draws each module as a labelled cluster.
    """
    lines = [
        "digraph safety_case {",
        '  graph [rankdir=TB, fontname="Helvetica"];',
        '  node [fontname="Helvetica", fontsize=10];',
        '  edge [fontname="Helvetica"];',
    ]
    for index, (module_id, graph) in enumerate(case.modules.items()):
        tags = display_tags(graph)
        if per_module:
            lines.append(f"  subgraph cluster_{index} {{")
            lines.append(f"    label={quote(module_id)};")
            indent = "    "
        else:
            indent = "  "
        for node in graph:
            lines.append(_node_stmt(node, tags[node.id], indent))
        if per_module:
            lines.append("  }")
    for graph in case.modules.values():
        for edge in graph.edges:
            lines.append(f"  {quote(edge.src)} -> {quote(edge.dst)} [{ARROWS[edge.kind]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
