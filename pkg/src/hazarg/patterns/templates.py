"""Pattern templates and the catalog document format.

A catalog is a YAML document with a ``templates`` list. Each template has
``id``, ``title``, optional ``derived_from``, ``params``, ``root``,
``nodes`` (``id``, ``kind``, ``tag``, ``text``), ``edges`` (``from``,
``to``, ``kind``, optional ``multiplicity``), ``choices`` and ``links``.
Edge ids are ``"<from>-><to>"``; skeletons are trees so these are unique.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable, Mapping

from ..errors import GsnError, PatternError
from ..gsn import EdgeKind, GsnEdge, GsnGraph, GsnNode, NodeKind, SafetyCase, build_graph, mark_developed, validate
from ..ingest.structured import Fields, dump_document, load_document

REFINE_RE = re.compile(r"\[([A-Za-z][A-Za-z0-9_]*)\]")
INSTANCE_RE = re.compile(r"\{([A-Za-z][A-Za-z0-9_]*)\}")


class ParamMode(str, Enum):
    REFINEMENT = "Refinement"
    INSTANTIATION = "Instantiation"


@dataclass(frozen=True)
class TemplateParam:
    name: str
    mode: ParamMode
    domain: str
    collection: bool = False
    choices: tuple[str, ...] = ()


@dataclass(frozen=True)
class ChoiceGroup:
    id: str
    edges: tuple[str, ...]
    min: int = 1
    max: int = 2


@dataclass(frozen=True)
class TemplateLink:
    """Attachment point: instances of ``family`` hang below node ``at``."""

    at: str
    family: str
    position: str | None = None


@dataclass(frozen=True)
class PatternTemplate:
    id: str
    title: str
    skeleton: GsnGraph
    params: tuple[TemplateParam, ...] = ()
    multiplicities: Mapping[str, str] = field(default_factory=dict)
    choices: tuple[ChoiceGroup, ...] = ()
    links: tuple[TemplateLink, ...] = ()
    derived_from: str | None = None
    bound: Mapping[str, str] = field(default_factory=dict)

    def param(self, name: str) -> TemplateParam | None:
        return next((p for p in self.params if p.name == name), None)

    def refinement_params(self) -> list[TemplateParam]:
        return [p for p in self.params if p.mode is ParamMode.REFINEMENT]

    def edge(self, edge_id: str) -> GsnEdge:
        return next(e for e in self.skeleton.edges if edge_id_of(e) == edge_id)

    def node_by_tag(self, tag: str) -> GsnNode | None:
        return next((n for n in self.skeleton if n.paper_tag == tag), None)


def edge_id_of(edge: GsnEdge) -> str:
    return f"{edge.src}->{edge.dst}"


def placeholders(text: str) -> tuple[set[str], set[str]]:
    """(refinement, instantiation) parameter names used in ``text``."""
    return set(REFINE_RE.findall(text)), set(INSTANCE_RE.findall(text))


def check_template(template: PatternTemplate, source: str | None = None) -> None:
    """Raise PatternError unless the template's structural invariants hold."""

    def fail(message: str) -> PatternError:
        return PatternError("bad-template", f"template {template.id}: {message}", source=source)

    names = [p.name for p in template.params]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise fail(f"duplicate params {', '.join(dupes)}")
    declared = set(names)
    tags: set[str] = set()
    for node in template.skeleton:
        refs, insts = placeholders(node.text)
        missing = sorted((refs | insts) - declared)
        if missing:
            raise fail(f"node {node.id} uses undeclared params {', '.join(missing)}")
        for name in refs:
            if template.param(name).mode is not ParamMode.REFINEMENT:  # type: ignore[union-attr]
                raise fail(f"[{name}] in node {node.id} is not a refinement param")
        for name in insts:
            if template.param(name).mode is not ParamMode.INSTANTIATION:  # type: ignore[union-attr]
                raise fail(f"{{{name}}} in node {node.id} is not an instantiation param")
        if not node.paper_tag:
            raise fail(f"node {node.id} has no tag")
        if node.paper_tag in tags:
            raise fail(f"tag {node.paper_tag!r} used twice")
        tags.add(node.paper_tag)

    edge_ids = {edge_id_of(e) for e in template.skeleton.edges}
    for edge_id, name in template.multiplicities.items():
        if edge_id not in edge_ids:
            raise fail(f"multiplicity on unknown edge {edge_id}")
        param = template.param(name)
        if param is None or param.mode is not ParamMode.INSTANTIATION or not param.collection:
            raise fail(f"multiplicity {edge_id} must name an instantiation collection, got {name!r}")
    for group in template.choices:
        for edge_id in group.edges:
            if edge_id not in edge_ids:
                raise fail(f"choice {group.id} names unknown edge {edge_id}")
        if len({template.edge(e).src for e in group.edges}) != 1:
            raise fail(f"choice {group.id} edges must share one source")
        if not 1 <= group.min <= group.max <= len(group.edges):
            raise fail(f"choice {group.id} bounds {group.min}..{group.max} are inconsistent")
    for link in template.links:
        if link.at not in template.skeleton.nodes:
            raise fail(f"link at unknown node {link.at}")

    incoming: dict[str, int] = {}
    for edge in template.skeleton.edges:
        incoming[edge.dst] = incoming.get(edge.dst, 0) + 1
    shared = sorted(n for n, count in incoming.items() if count > 1)
    if shared:
        raise fail(f"skeleton is not a tree at {', '.join(shared)}")
    violations = validate(SafetyCase({template.id: template.skeleton}))
    if violations:
        raise fail("skeleton invalid: " + "; ".join(f"{v.code} {v.message}" for v in violations))


def _template_from_data(raw: Any, doc: Fields) -> PatternTemplate:
    f = doc.sub(raw, "template")
    ident = f.str("id")
    params = []
    for raw_param in f.list("params"):
        pf = f.sub(raw_param, f"param of {ident}")
        try:
            mode = ParamMode(pf.str("mode"))
        except ValueError:
            raise pf.error("bad-value", f"param mode must be Refinement or Instantiation in {ident}") from None
        params.append(
            TemplateParam(
                name=pf.str("name"),
                mode=mode,
                domain=pf.str("domain", default=""),
                collection=bool(pf.data.get("collection", False)),
                choices=pf.strs("choices"),
            )
        )
    nodes = []
    for raw_node in f.list("nodes", required=True):
        nf = f.sub(raw_node, f"node of {ident}")
        try:
            kind = NodeKind(nf.str("kind"))
        except ValueError:
            raise nf.error("bad-value", f"unknown node kind in {ident}") from None
        nodes.append(GsnNode(nf.str("id"), kind, nf.str("text"), paper_tag=nf.str("tag")))
    edges = []
    multiplicities = {}
    for raw_edge in f.list("edges"):
        ef = f.sub(raw_edge, f"edge of {ident}")
        try:
            kind = EdgeKind(ef.str("kind"))
        except ValueError:
            raise ef.error("bad-value", f"unknown edge kind in {ident}") from None
        edge = GsnEdge(ef.str("from"), ef.str("to"), kind)
        edges.append(edge)
        if ef.opt("multiplicity"):
            multiplicities[edge_id_of(edge)] = ef.str("multiplicity")
    root = f.str("root")
    ordered = sorted(nodes, key=lambda n: n.id != root)
    try:
        skeleton = mark_developed(build_graph(ordered, edges))
    except GsnError as exc:
        raise f.error("bad-template", f"template {ident}: {exc.message}") from None
    choices = []
    for raw_choice in f.list("choices"):
        cf = f.sub(raw_choice, f"choice of {ident}")
        choices.append(
            ChoiceGroup(cf.str("id"), cf.strs("edges"), int(cf.str("min", default="1")), int(cf.str("max", default="2")))
        )
    links = []
    for raw_link in f.list("links"):
        lf = f.sub(raw_link, f"link of {ident}")
        links.append(TemplateLink(lf.str("at"), lf.str("family"), lf.opt("position")))
    template = PatternTemplate(
        id=ident,
        title=f.str("title", default=ident),
        skeleton=skeleton,
        params=tuple(params),
        multiplicities=multiplicities,
        choices=tuple(choices),
        links=tuple(links),
        derived_from=f.opt("derived_from"),
    )
    try:
        check_template(template, doc.source)
    except PatternError as exc:
        raise f.error(exc.code, exc.message) from None
    return template


def load_templates(text: str, source: str | None = None) -> list[PatternTemplate]:
    """Parse a catalog document into checked templates."""
    data = load_document(text, source)
    doc = Fields(data if data is not None else {}, "catalog", source, 1)
    templates = [_template_from_data(raw, doc) for raw in doc.list("templates", required=True)]
    seen: set[str] = set()
    for t in templates:
        if t.id in seen:
            raise doc.error("duplicate-id", f"template id {t.id!r} used twice")
        seen.add(t.id)
    return templates


def template_to_data(template: PatternTemplate) -> dict[str, Any]:
    out: dict[str, Any] = {"id": template.id, "title": template.title}
    if template.derived_from:
        out["derived_from"] = template.derived_from
    params = []
    for p in template.params:
        item: dict[str, Any] = {"name": p.name, "mode": p.mode.value, "domain": p.domain}
        if p.collection:
            item["collection"] = True
        if p.choices:
            item["choices"] = list(p.choices)
        params.append(item)
    out["params"] = params
    out["root"] = template.skeleton.root
    out["nodes"] = [
        {"id": n.id, "kind": n.kind.value, "tag": n.paper_tag, "text": n.text} for n in template.skeleton
    ]
    edges = []
    for e in template.skeleton.edges:
        item = {"from": e.src, "to": e.dst, "kind": e.kind.value}
        if edge_id_of(e) in template.multiplicities:
            item["multiplicity"] = template.multiplicities[edge_id_of(e)]
        edges.append(item)
    out["edges"] = edges
    if template.choices:
        out["choices"] = [{"id": c.id, "edges": list(c.edges), "min": c.min, "max": c.max} for c in template.choices]
    if template.links:
        links = []
        for link in template.links:
            item = {"at": link.at, "family": link.family}
            if link.position is not None:
                item["position"] = link.position
            links.append(item)
        out["links"] = links
    return out


def dump_templates(templates: Iterable[PatternTemplate]) -> str:
    return dump_document({"templates": [template_to_data(t) for t in templates]})


@lru_cache(maxsize=1)
def _builtin() -> tuple[PatternTemplate, ...]:
    text = resources.files("hazarg.patterns").joinpath("catalog.yaml").read_text(encoding="utf-8")
    return tuple(load_templates(text, "catalog.yaml"))


def builtin_templates() -> list[PatternTemplate]:
    return list(_builtin())


def builtin(template_id: str) -> PatternTemplate:
    for t in _builtin():
        if t.id == template_id:
            return t
    raise PatternError("unknown-template", f"no builtin template {template_id!r}")


# Refinement values that turn HC-GEN into the technique-specific HC templates.
HC_REFINEMENTS: dict[str, dict[str, str]] = {
    "FTA": {"CT": "eliminating minimum cutset (MCS)", "Refs": "{C}", "AT": "FTA"},
    "FMEA": {"CT": "mitigating failure mode", "Refs": "{FM}", "AT": "FMEA"},
    "STPA": {"CT": "mitigation of unsafe control action and hazard", "Refs": "{UCA} and {H}", "AT": "STPA"},
}
