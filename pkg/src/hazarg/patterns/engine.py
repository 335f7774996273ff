"""Refinement, instantiation and structural comparison of templates."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from ..errors import GsnError, PatternError
from ..gsn import DEVELOPABLE, GsnEdge, GsnGraph, GsnNode, SafetyCase, build_graph, mark_developed, validate
from .templates import INSTANCE_RE, REFINE_RE, ParamMode, PatternTemplate, TemplateParam, edge_id_of

SOURCE = "_source"
KEY = "key"


@dataclass(frozen=True)
class Binding:
    """Values for one instantiation.

    ``instantiation_values`` maps scalar params to strings and collection
    params to sequences of element mappings. Each element carries a ``key``
    (its stable id, appended to the ids of the copied nodes), its own
    scalar and nested-collection values, and optionally ``_source`` naming
    the hazard-analysis element the copy traces back to.
    """

    template_id: str
    refinement_values: Mapping[str, str] = field(default_factory=dict)
    instantiation_values: Mapping[str, Any] = field(default_factory=dict)
    choice_selections: Mapping[str, frozenset[str]] = field(default_factory=dict)
    instance: str = ""
    position: str | None = None
    source: str | tuple[str, ...] | None = None


def refine(template: PatternTemplate, refinement_values: Mapping[str, str], new_id: str | None = None) -> PatternTemplate:
    """Substitute ``[param]`` placeholders, yielding a derived template."""
    values = dict(refinement_values)
    open_params = {p.name: p for p in template.refinement_params()}
    for name in sorted(values):
        if name in open_params:
            continue
        if name in template.bound:
            if template.bound[name] != values[name]:
                raise PatternError("rebound-param", f"{name} already refined to {template.bound[name]!r}")
            continue
        raise PatternError("unknown-param", f"template {template.id} has no refinement param {name!r}")
    missing = sorted(set(open_params) - set(values))
    if missing:
        raise PatternError("unbound-param", f"template {template.id} needs values for {', '.join(missing)}")
    if not open_params:
        return template
    for name, param in open_params.items():
        value = values[name]
        if not str(value).strip():
            raise PatternError("domain-violation", f"empty value for {name}")
        if param.choices and value not in param.choices:
            raise PatternError(
                "domain-violation", f"{name}={value!r} outside {{{', '.join(param.choices)}}}"
            )
        if "[" in value or "]" in value:
            raise PatternError("domain-violation", f"{name} value may not contain brackets")

    def sub(text: str) -> str:
        return REFINE_RE.sub(lambda m: values[m.group(1)] if m.group(1) in open_params else m.group(0), text)

    nodes = {nid: replace(n, text=sub(n.text)) for nid, n in template.skeleton.nodes.items()}
    skeleton = GsnGraph(nodes=nodes, edges=template.skeleton.edges, root=template.skeleton.root)

    params: list[TemplateParam] = [p for p in template.params if p.name not in open_params]
    known = {p.name for p in params}
    for node in template.skeleton:
        for m in REFINE_RE.finditer(node.text):
            if m.group(1) not in open_params:
                continue
            for name in INSTANCE_RE.findall(values[m.group(1)]):
                if name not in known:
                    known.add(name)
                    params.append(
                        TemplateParam(name, ParamMode.INSTANTIATION, f"introduced by refining {m.group(1)}")
                    )
    bound = dict(template.bound)
    bound.update({k: values[k] for k in open_params})
    return replace(
        template,
        id=new_id or f"{template.id}/refined",
        skeleton=skeleton,
        params=tuple(params),
        derived_from=template.id,
        bound=bound,
    )


# ---------------------------------------------------------------------------
# instantiation


def _lookup(scopes: Sequence[Mapping[str, Any]], name: str) -> Any:
    for scope in reversed(scopes):
        if name in scope:
            return scope[name]
    return None


def _fill(text: str, scopes: Sequence[Mapping[str, Any]]) -> tuple[str, bool]:
    """Substitute bound ``{param}`` values; report whether any stayed unbound."""
    unbound = False

    def repl(m: Any) -> str:
        nonlocal unbound
        value = _lookup(scopes, m.group(1))
        if value is None or isinstance(value, (list, tuple)):
            unbound = True
            return m.group(0)
        return str(value)

    return INSTANCE_RE.sub(repl, text), unbound


def _sources(scopes: Sequence[Mapping[str, Any]]) -> tuple[str, ...]:
    """Source keys of every enclosing scope, outermost first, innermost wins ``source_ref``."""
    out: list[str] = []
    for scope in scopes:
        value = scope.get(SOURCE)
        for key in (value,) if isinstance(value, str) else value or ():
            if key not in out:
                out.append(key)
    return tuple(out)


def instance_id(skeleton_id: str, keys: Sequence[str], binding: Binding) -> str:
    base = skeleton_id
    if binding.position is not None:
        base = base.replace(".x", "." + binding.position)
    if keys:
        base += "-" + "-".join(keys)
    if binding.instance:
        base += "@" + binding.instance
    return base


class _Expander:
    def __init__(self, template: PatternTemplate, binding: Binding) -> None:
        self.t = template
        self.b = binding
        self.nodes: list[GsnNode] = []
        self.edges: list[GsnEdge] = []
        self.seen: set[str] = set()
        self.trace: dict[str, tuple[str, ...]] = {}
        self.groups = {e: g for g in template.choices for e in g.edges}
        for group_id, selection in binding.choice_selections.items():
            group = next((g for g in template.choices if g.id == group_id), None)
            if group is None:
                raise PatternError("choice-violation", f"template {template.id} has no choice group {group_id!r}")
            unknown = sorted(set(selection) - set(group.edges))
            if unknown:
                raise PatternError("choice-violation", f"choice {group_id} has no branch {', '.join(unknown)}")
            if not group.min <= len(selection) <= group.max:
                raise PatternError(
                    "choice-violation",
                    f"choice {group_id} selects {len(selection)} branch(es), needs {group.min}..{group.max}",
                )

    def out_edges(self, node_id: str) -> list[GsnEdge]:
        return [e for e in self.t.skeleton.edges if e.src == node_id]

    def has_data(self, edge: GsnEdge, scopes: Sequence[Mapping[str, Any]]) -> bool:
        """A branch has data if a collection in it is non-empty, or else if its head is fully bound."""
        collections = []
        stack = [edge]
        while stack:
            e = stack.pop()
            name = self.t.multiplicities.get(edge_id_of(e))
            if name is not None:
                collections.append(name)
            else:
                stack.extend(self.out_edges(e.dst))
        if collections:
            return any(_lookup(scopes, name) for name in collections)
        return not _fill(self.t.skeleton.nodes[edge.dst].text, scopes)[1]

    def selected(self, node_id: str, scopes: Sequence[Mapping[str, Any]]) -> set[str]:
        """Edge ids of ``node_id`` that survive choice reduction."""
        chosen: set[str] = set()
        done: set[str] = set()
        for edge in self.out_edges(node_id):
            eid = edge_id_of(edge)
            group = self.groups.get(eid)
            if group is None:
                chosen.add(eid)
                continue
            if group.id in done:
                continue
            done.add(group.id)
            if group.id in self.b.choice_selections:
                chosen.update(self.b.choice_selections[group.id])
                continue
            picks = [e for e in group.edges if self.has_data(self.t.edge(e), scopes)]
            chosen.update(picks[: group.max] if picks else group.edges[: group.min])
        return chosen

    def emit(self, skeleton_id: str, scopes: list[Mapping[str, Any]], keys: list[str]) -> str | None:
        node = self.t.skeleton.nodes[skeleton_id]
        text, unbound = _fill(node.text, scopes)
        if unbound and node.kind not in DEVELOPABLE:
            return None
        ident = instance_id(skeleton_id, keys, self.b)
        if ident in self.seen:
            raise PatternError("duplicate-suffix", f"instance id {ident!r} generated twice")
        self.seen.add(ident)
        tag = node.paper_tag
        if tag and self.b.position is not None:
            tag = tag.replace(".x", "." + self.b.position)
        inner = _lookup(scopes, SOURCE)
        source = inner if isinstance(inner, str) or inner is None else (inner[0] if inner else None)
        self.nodes.append(replace(node, id=ident, text=text, source_ref=source, paper_tag=tag))
        keys_here = _sources(scopes)
        if keys_here:
            self.trace[ident] = keys_here
        if unbound:
            return ident  # deferred: kept as an undeveloped claim without its subtree
        chosen = self.selected(skeleton_id, scopes)
        for edge in self.out_edges(skeleton_id):
            if edge_id_of(edge) not in chosen:
                continue
            name = self.t.multiplicities.get(edge_id_of(edge))
            if name is None:
                child = self.emit(edge.dst, scopes, keys)
                if child is not None:
                    self.edges.append(GsnEdge(ident, child, edge.kind))
                continue
            collection = _lookup(scopes, name) or ()
            seen_keys: set[str] = set()
            for element in collection:
                key = str(element[KEY])
                if key in seen_keys:
                    raise PatternError("duplicate-suffix", f"collection {name} repeats element key {key!r}")
                seen_keys.add(key)
                child = self.emit(edge.dst, scopes + [element], keys + [key])
                if child is not None:
                    self.edges.append(GsnEdge(ident, child, edge.kind))
        return ident


def instantiate(
    template: PatternTemplate, binding: Binding, trace: dict[str, tuple[str, ...]] | None = None
) -> GsnGraph:
    """Expand ``template`` with ``binding`` into a concrete goal structure.

    When ``trace`` is given it receives, per emitted node, the source keys
    of the binding and of every collection element the node was copied for.
    """
    if binding.template_id not in (template.id, template.derived_from):
        raise PatternError("template-mismatch", f"binding for {binding.template_id!r} applied to {template.id!r}")
    if binding.refinement_values or template.refinement_params():
        template = refine(template, binding.refinement_values, new_id=template.id)
    for node in template.skeleton:
        if REFINE_RE.search(node.text):
            raise PatternError("leftover-placeholder", f"node {node.id} still has a refinement placeholder")
    for name, value in binding.instantiation_values.items():
        param = template.param(name)
        if param is not None and param.collection and not isinstance(value, (list, tuple)):
            raise PatternError("bad-binding", f"collection {name} must be bound to a sequence")
        if isinstance(value, (list, tuple)):
            for element in value:
                if not isinstance(element, Mapping) or KEY not in element:
                    raise PatternError("bad-binding", f"elements of {name} need a {KEY!r}")
    root_scope = dict(binding.instantiation_values)
    if binding.source is not None:
        root_scope[SOURCE] = binding.source
    expander = _Expander(template, binding)
    expander.emit(template.skeleton.root, [root_scope], [])  # type: ignore[arg-type]
    try:
        graph = mark_developed(build_graph(expander.nodes, expander.edges))
    except GsnError as exc:  # pragma: no cover - skeleton checks make this unreachable
        raise PatternError("invalid-instance", exc.message) from None
    problems = validate(SafetyCase({binding.instance or template.id: graph}))
    if problems:  # pragma: no cover - same as above
        raise PatternError("invalid-instance", "; ".join(v.message for v in problems))
    if trace is not None:
        trace.update(expander.trace)
    return graph


def template_diff(a: PatternTemplate, b: PatternTemplate) -> list[str]:
    """Differences between two templates, matching nodes by their tag."""
    out: list[str] = []
    a_nodes = {n.paper_tag: n for n in a.skeleton}
    b_nodes = {n.paper_tag: n for n in b.skeleton}
    for tag in sorted(set(a_nodes) - set(b_nodes)):
        out.append(f"node {tag!r} only in {a.id}")
    for tag in sorted(set(b_nodes) - set(a_nodes)):
        out.append(f"node {tag!r} only in {b.id}")
    for tag in sorted(set(a_nodes) & set(b_nodes)):
        x, y = a_nodes[tag], b_nodes[tag]
        if x.kind is not y.kind:
            out.append(f"node {tag!r} kind {x.kind.value} != {y.kind.value}")
        if x.text != y.text:
            out.append(f"node {tag!r} text {x.text!r} != {y.text!r}")

    def edges(t: PatternTemplate) -> set[tuple[str, str, str, str]]:
        tag = {n.id: n.paper_tag for n in t.skeleton}
        return {
            (tag[e.src], tag[e.dst], e.kind.value, t.multiplicities.get(edge_id_of(e), ""))
            for e in t.skeleton.edges
        }

    def choices(t: PatternTemplate) -> set[tuple[frozenset[tuple[str, str]], int, int]]:
        tag = {n.id: n.paper_tag for n in t.skeleton}
        out = set()
        for g in t.choices:
            ends = frozenset((tag[t.edge(e).src], tag[t.edge(e).dst]) for e in g.edges)
            out.add((ends, g.min, g.max))
        return out

    for e in sorted(edges(a) - edges(b)):
        out.append(f"edge {e[0]!r} -> {e[1]!r} ({e[2]}{', x' + e[3] if e[3] else ''}) only in {a.id}")
    for e in sorted(edges(b) - edges(a)):
        out.append(f"edge {e[0]!r} -> {e[1]!r} ({e[2]}{', x' + e[3] if e[3] else ''}) only in {b.id}")
    if choices(a) != choices(b):
        out.append("choice groups differ")
    if (a.skeleton.nodes[a.skeleton.root].paper_tag if a.skeleton.root else None) != (
        b.skeleton.nodes[b.skeleton.root].paper_tag if b.skeleton.root else None
    ):
        out.append("roots differ")
    return out


__all__ = ["Binding", "instance_id", "instantiate", "refine", "template_diff"]
