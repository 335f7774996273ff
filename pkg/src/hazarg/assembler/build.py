"""Assemble M, CR and HC module instances into one linked safety case."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from ..errors import BuildError, PatternError
from ..gsn import EdgeKind, GsnEdge, GsnGraph, GsnNode, NodeKind, SafetyCase, merge_graphs, validate
from ..ingest.countermeasures import CountermeasureRecord, serialize_countermeasures, source_keys
from ..ingest.fault_tree import Cutset, FaultTree, critical_paths, minimal_cutsets, serialize_fault_tree
from ..ingest.fmea import FmeaEntry, high_rpn, serialize_fmea
from ..ingest.stpa import Hazard, StpaModel, Uca, serialize_stpa
from ..patterns import Binding, PatternTemplate, builtin, instance_id, instantiate
from .config import BuildConfig, Sequence, Technique

M_CONTEXT_TAGS = ("Context 2", "Context 3")
TARGET_TECHNIQUE = {"cutset": Technique.FTA, "fmea": Technique.FMEA, "uca": Technique.STPA, "hazard": Technique.STPA}


@dataclass(frozen=True)
class Sources:
    """The parsed hazard-analysis inputs of one build."""

    trees: tuple[FaultTree, ...] = ()
    fmea: tuple[FmeaEntry, ...] = ()
    stpa: StpaModel | None = None
    countermeasures: tuple[CountermeasureRecord, ...] = ()

    def restricted(self, include: Iterable[Technique]) -> "Sources":
        include = set(include)
        return Sources(
            trees=self.trees if Technique.FTA in include else (),
            fmea=self.fmea if Technique.FMEA in include else (),
            stpa=self.stpa if Technique.STPA in include else None,
            countermeasures=self.countermeasures,
        )

    def digests(self) -> dict[str, Any]:
        """sha256 of the canonical re-serialisation of every input."""

        def sha(text: str) -> str:
            return hashlib.sha256(text.encode("utf-8")).hexdigest()

        out: dict[str, Any] = {}
        if self.trees:
            out["fta"] = {t.top: sha(serialize_fault_tree(t)) for t in self.trees}
        if self.fmea:
            out["fmea"] = sha(serialize_fmea(list(self.fmea)))
        if self.stpa is not None:
            out["stpa"] = sha(serialize_stpa(self.stpa))
        out["countermeasures"] = sha(serialize_countermeasures(self.countermeasures))
        return out


# ---------------------------------------------------------------- value rendering


def cutset_text(tree: FaultTree, cutset: Cutset) -> str:
    return "(" + ", ".join(tree.events[m].label for m in sorted(cutset.members)) + ")"


def probability_text(p: float | None) -> str:
    return "unknown" if p is None else f"{p:.3g}"


def policy_text(cfg: BuildConfig) -> str:
    if cfg.policy.top_k is not None:
        return f"the {cfg.policy.top_k} most probable minimal cutset(s)"
    return f"cutset probability of at least {cfg.policy.threshold:g}"


def record_label(record: CountermeasureRecord) -> str:
    return f"{record.label} ({record.id})"


def action_text(record: CountermeasureRecord, cutset: Cutset) -> str:
    target = record.target(cutset.source_key)
    if target is None or target.mode.value == "eliminate":
        return "eliminating"
    return (
        f"reducing to {target.post_probability:g} (acceptable maximum {target.acceptable_max:g}) "
        "the failure rate of"
    )


def stpa_event(hazard: Hazard, accident_label: str) -> str:
    return f"{hazard.label} leading to {accident_label}"


def requirement_elements(record: CountermeasureRecord) -> list[dict[str, Any]]:
    return [
        {"key": q.id, "RID": q.id, "RTYPE": q.rtype.value, "R": q.text, "_source": f"req:{q.id}"}
        for q in record.requirements
    ]


def evidence_values(record: CountermeasureRecord) -> dict[str, str]:
    out = {}
    if record.implementation_evidence is not None:
        out["IE"] = record.implementation_evidence
    if record.verification_evidence is not None:
        out["VE"] = record.verification_evidence
    return out


# ---------------------------------------------------------------- module plans


@dataclass
class Module:
    id: str
    graph: GsnGraph
    trace: dict[str, tuple[str, ...]]


@dataclass
class CrPlan:
    """One causal-reasoning module and the countermeasure modules below it."""

    item_key: str
    item_label: str
    technique: Technique
    cr: Module
    # (CR node the HC root hangs below, HC module)
    hcs: list[tuple[str, Module]] = field(default_factory=list)


def _link_position(template: PatternTemplate, at: str) -> str:
    link = next(link for link in template.links if link.at == at)
    assert link.position is not None
    return link.position


def _instantiate(template_id: str, binding: Binding) -> Module:
    trace: dict[str, tuple[str, ...]] = {}
    try:
        graph = instantiate(builtin(template_id), binding, trace)
    except PatternError as exc:
        raise BuildError(exc.code, f"{binding.instance}: {exc.message}") from None
    return Module(binding.instance, graph, trace)


def _hc(
    family: str,
    module_id: str,
    position: str,
    values: dict[str, Any],
    record: CountermeasureRecord,
    source: tuple[str, ...],
) -> Module:
    values = dict(values)
    values["DR"] = record_label(record)
    values.setdefault("RC", requirement_elements(record))
    values.setdefault("RH", [])
    values.update(evidence_values(record))
    binding = Binding(family, instantiation_values=values, instance=module_id, position=position, source=source)
    return _instantiate(family, binding)


def _fta_plan(tree: FaultTree, critical: list[Cutset], records: list[CountermeasureRecord], cfg: BuildConfig) -> CrPlan:
    template = builtin("CR-FTA")
    module_id = f"CR-FTA-{tree.top}"
    label = tree.top_event.label
    pairs: list[dict[str, Any]] = []
    process: list[dict[str, Any]] = []
    pending: list[tuple[str, str, dict[str, Any], CountermeasureRecord, tuple[str, ...]]] = []
    for cutset in critical:
        c_text = cutset_text(tree, cutset)
        base = {"C": c_text, "P": probability_text(cutset.probability)}
        targeting = [r for r in records if cutset.source_key in r.target_keys]
        design = [r for r in targeting if not r.is_process_measure]
        if not design:
            pairs.append({"key": cutset.key, **base, "_source": cutset.source_key})
        for r in design:
            key = f"{cutset.key}-{r.id}"
            src = (cutset.source_key, f"cm:{r.id}")
            pairs.append({"key": key, **base, "DR": record_label(r), "ACTION": action_text(r, cutset), "_source": src})
            pending.append(("G2.1.2", key, {"C": c_text}, r, src))
        for r in (r for r in targeting if r.is_process_measure):
            key = f"{cutset.key}-{r.id}"
            src = (cutset.source_key, f"cm:{r.id}")
            process.append({"key": key, "C": c_text, "PM": record_label(r), "_source": src})
            pending.append(("G2.1.3", key, {"C": c_text}, r, src))
    binding = Binding(
        "CR-FTA",
        instantiation_values={"E": label, "POLICY": policy_text(cfg), "pairs": pairs, "process": process},
        instance=module_id,
        source=f"event:{tree.top}",
    )
    plan = CrPlan(tree.top, label, Technique.FTA, _instantiate("CR-FTA", binding))
    for at, key, values, record, src in pending:
        hc_id = f"HC-FTA-{tree.top}-{key}"
        position = _link_position(template, at)
        plan.hcs.append((instance_id(at, [key], binding), _hc("HC-FTA", hc_id, position, values, record, src)))
    return plan


def _fmea_plan(entry: FmeaEntry, records: list[CountermeasureRecord]) -> CrPlan:
    template = builtin("CR-FMEA")
    module_id = f"CR-FMEA-{entry.id}"
    by_id = {r.id: r for r in records}
    targeting = sorted(r.id for r in records if entry.source_key in r.target_keys)
    ids = list(dict.fromkeys(list(entry.mitigations) + targeting))
    revisions: list[dict[str, Any]] = []
    process: list[dict[str, Any]] = []
    pending = []
    for ident in ids:
        record = by_id.get(ident)
        if record is None:
            # Declared on the worksheet but not recorded: the claim stays undeveloped.
            revisions.append({"key": ident, "DR": ident, "_source": entry.source_key})
            continue
        src = (entry.source_key, f"cm:{ident}")
        if record.is_process_measure:
            process.append({"key": ident, "PM": record_label(record), "_source": src})
            pending.append(("G2.1.3", ident, record, src))
        else:
            revisions.append({"key": ident, "DR": record_label(record), "_source": src})
            pending.append(("G2.1.2", ident, record, src))
    values = {
        "FM": entry.failure_mode,
        "FMID": entry.id,
        "ITEM": entry.item,
        "EFFECTS": "; ".join(entry.effects),
        "RPN": str(entry.rpn),
        "SOD": f"S={entry.severity}, O={entry.occurrence}, D={entry.detection}, RPN={entry.rpn}",
        "revisions": revisions,
        "process": process,
    }
    binding = Binding("CR-FMEA", instantiation_values=values, instance=module_id, source=entry.source_key)
    plan = CrPlan(entry.id, entry.failure_mode, Technique.FMEA, _instantiate("CR-FMEA", binding))
    for at, key, record, src in pending:
        hc_id = f"HC-FMEA-{entry.id}-{key}"
        position = _link_position(template, at)
        hc = _hc("HC-FMEA", hc_id, position, {"FM": entry.failure_mode}, record, src)
        plan.hcs.append((instance_id(at, [key], binding), hc))
    return plan


def _constraint_elements(model: StpaModel, origin: str) -> list[dict[str, Any]]:
    return [
        {"key": c.id, "RID": c.id, "RTYPE": c.kind.value, "R": c.text, "_source": f"constraint:{c.id}"}
        for c in model.constraints_from(origin)
    ]


def _stpa_plan(model: StpaModel, hazard: Hazard, accident_id: str, records: list[CountermeasureRecord]) -> CrPlan:
    template = builtin("CR-STPA")
    accident = model.accident(accident_id)
    item_key = f"{hazard.id}.{accident.id}"
    module_id = f"CR-STPA-{item_key}"
    event = stpa_event(hazard, accident.label)
    ucas: list[dict[str, Any]] = []
    process: list[dict[str, Any]] = []
    pending: list[tuple[str, str, Uca, CountermeasureRecord, tuple[str, ...]]] = []
    for uca in model.ucas_of(hazard.id):
        base = {
            "UCA": uca.text,
            "UCAID": uca.id,
            "GW": uca.guide_word.value,
            "CA": model.control_action(uca.control_action_id).label,
            "factors": [
                {"key": f.id, "CF": f.text, "_source": f"factor:{f.id}"} for f in model.factors_of(uca.id)
            ],
        }
        measures = [r for r in records if uca.source_key in r.target_keys or hazard.source_key in r.target_keys]
        design = [r for r in measures if not r.is_process_measure]
        if not design:
            ucas.append({"key": uca.id, **base, "_source": uca.source_key})
        for r in design:
            key = f"{uca.id}-{r.id}"
            src = (uca.source_key, f"cm:{r.id}")
            ucas.append({"key": key, **base, "DR": record_label(r), "_source": src})
            pending.append(("G2.1.5", key, uca, r, src))
        for r in (r for r in measures if r.is_process_measure):
            key = f"{uca.id}-{r.id}"
            src = (uca.source_key, f"cm:{r.id}")
            process.append({"key": key, "UCA": uca.text, "PM": record_label(r), "_source": src})
            pending.append(("G2.1.6", key, uca, r, src))
    values = {
        "E": event,
        "A": accident.label,
        "AID": accident.id,
        "H": hazard.label,
        "HID": hazard.id,
        "ucas": ucas,
        "process": process,
    }
    binding = Binding(
        "CR-STPA",
        instantiation_values=values,
        instance=module_id,
        source=(hazard.source_key, f"accident:{accident.id}"),
    )
    plan = CrPlan(item_key, event, Technique.STPA, _instantiate("CR-STPA", binding))
    for at, key, uca, record, src in pending:
        hc_values = {
            "UCA": uca.text,
            "H": hazard.label,
            "RC": _constraint_elements(model, uca.id) + requirement_elements(record),
            "RH": _constraint_elements(model, hazard.id),
        }
        hc_id = f"HC-STPA-{item_key}-{key}"
        position = _link_position(template, at)
        plan.hcs.append((instance_id(at, [key], binding), _hc("HC-STPA", hc_id, position, hc_values, record, src)))
    return plan


# ---------------------------------------------------------------- linking


def away_goal(module_id: str, graph: GsnGraph) -> GsnNode:
    target = graph.nodes[graph.root]  # type: ignore[index]
    return GsnNode(
        id=f"AG-{target.id}",
        kind=NodeKind.AWAY_GOAL,
        text=target.text,
        source_ref=target.source_ref,
        paper_tag=target.paper_tag,
        target=(module_id, target.id),
    )


def attach(graph: GsnGraph, parent_id: str, node: GsnNode, kind: EdgeKind = EdgeKind.SUPPORTED_BY) -> GsnGraph:
    nodes = dict(graph.nodes)
    if node.id in nodes:
        raise BuildError("duplicate-id", f"node {node.id!r} attached twice")
    if kind is EdgeKind.SUPPORTED_BY:
        nodes[parent_id] = replace(nodes[parent_id], developed=True)
    nodes[node.id] = node
    return GsnGraph(nodes=nodes, edges=graph.edges + (GsnEdge(parent_id, node.id, kind),), root=graph.root)


def event_links(trees: Iterable[FaultTree], entries: Iterable[FmeaEntry]) -> dict[str, list[str]]:
    """FTA top event id -> ids of (argued) FMEA entries naming it among their effects."""
    links: dict[str, list[str]] = {t.top: [] for t in trees}
    for entry in entries:
        for event in entry.linked_events:
            if event in links and entry.id not in links[event]:
                links[event].append(entry.id)
    return {k: sorted(v) for k, v in sorted(links.items())}


# ---------------------------------------------------------------- entry point


def _check_targets(sources: Sources, included: Sources, cfg: BuildConfig) -> None:
    known = source_keys(included.trees, included.fmea, included.stpa)
    for record in sources.countermeasures:
        for key in record.target_keys:
            technique = TARGET_TECHNIQUE.get(key.split(":", 1)[0])
            if technique is not None and technique not in cfg.include:
                raise BuildError(
                    "excluded-target",
                    f"countermeasure {record.id!r} targets {key!r} but {technique.value} is not included",
                )
            if key not in known:
                raise BuildError("unknown-target", f"countermeasure {record.id!r} targets unknown source {key!r}")


def _as_trees(fta: FaultTree | Iterable[FaultTree] | None) -> tuple[FaultTree, ...]:
    if fta is None:
        return ()
    if isinstance(fta, FaultTree):
        return (fta,)
    return tuple(fta)


def critical_cutsets(tree: FaultTree, cfg: BuildConfig) -> list[Cutset]:
    try:
        ranked = critical_paths(minimal_cutsets(tree), cfg.policy)
    except ValueError as exc:
        raise BuildError("missing-probability", f"fault tree {tree.top}: {exc}") from None
    return [c for c in ranked if c.critical]


def build_safety_case(
    fta: FaultTree | Iterable[FaultTree] | None = None,
    fmea: Iterable[FmeaEntry] | None = None,
    stpa: StpaModel | None = None,
    cms: Iterable[CountermeasureRecord] = (),
    cfg: BuildConfig | None = None,
) -> SafetyCase:
    """Instantiate and link all modules for the given analyses."""
    if cfg is None:
        raise BuildError("bad-config", "a BuildConfig is required")
    sources = Sources(_as_trees(fta), tuple(fmea or ()), stpa, tuple(cms))
    if not sources.trees and not sources.fmea and sources.stpa is None:
        raise BuildError("no-artifacts", "at least one hazard analysis is required")
    included = sources.restricted(cfg.include)
    _check_targets(sources, included, cfg)
    records = sorted(sources.countermeasures, key=lambda r: r.id)

    plans: list[CrPlan] = []
    tops = [t.top for t in included.trees]
    if len(set(tops)) != len(tops):
        raise BuildError("duplicate-id", "two fault trees share a top event id")
    for tree in sorted(included.trees, key=lambda t: t.top):
        plans.append(_fta_plan(tree, critical_cutsets(tree, cfg), records, cfg))
    if included.stpa is not None:
        for hazard in included.stpa.hazards:
            for accident_id in hazard.accident_ids:
                plans.append(_stpa_plan(included.stpa, hazard, accident_id, records))
    argued_fmea = high_rpn(list(included.fmea), cfg.rpn_threshold)
    for entry in argued_fmea:
        plans.append(_fmea_plan(entry, records))
    if not plans:
        raise BuildError("no-hazards", "no system-level event or high-RPN failure mode to argue over")
    if cfg.sequence is Sequence.ITEM_FIRST:
        plans.sort(key=lambda p: (p.item_label, p.item_key))
    keys = [p.item_key for p in plans]
    if len(set(keys)) != len(keys):
        raise BuildError("duplicate-id", "hazard ids collide across techniques")

    # Module M: one Strategy-1 branch per hazard category present.
    m_trace: dict[str, tuple[str, ...]] = {}
    m_graph: GsnGraph | None = None
    categories = (
        ("M-FTA-STPA", "E", [p for p in plans if p.technique is not Technique.FMEA]),
        ("M-FMEA", "FM", [p for p in plans if p.technique is Technique.FMEA]),
    )
    for template_id, param, group in categories:
        if not group:
            continue
        hazards = [
            {"key": p.item_key, param: p.item_label, "_source": p.cr.trace[p.cr.graph.root]}  # type: ignore[index]
            for p in group
        ]
        binding = Binding(template_id, instantiation_values={"S": cfg.system_name, "hazards": hazards}, instance="M")
        part = _instantiate(template_id, binding)
        m_trace.update(part.trace)
        m_graph = part.graph if m_graph is None else merge_graphs(m_graph, part.graph)
    assert m_graph is not None
    if not cfg.m_contexts:
        drop = {n.id for n in m_graph if n.paper_tag in M_CONTEXT_TAGS}
        m_graph = GsnGraph(
            nodes={k: v for k, v in m_graph.nodes.items() if k not in drop},
            edges=tuple(e for e in m_graph.edges if e.dst not in drop),
            root=m_graph.root,
        )

    modules: dict[str, GsnGraph] = {}
    trace: dict[str, tuple[str, ...]] = {}
    for plan in plans:
        g2 = instance_id("G2", [plan.item_key], Binding("", instance="M"))
        link = away_goal(plan.cr.id, plan.cr.graph)
        m_graph = attach(m_graph, g2, link)
        m_trace[link.id] = plan.cr.trace.get(plan.cr.graph.root, ())  # type: ignore[arg-type]

    links = event_links(included.trees, argued_fmea)
    for event, fm_ids in links.items():
        if not fm_ids:
            continue
        plan = next(p for p in plans if p.technique is Technique.FTA and p.item_key == event)
        note = GsnNode(
            id=f"C-XL-{event}@M",
            kind=NodeKind.CONTEXT,
            text=(
                f"{plan.item_label} is argued from two directions: its critical paths and "
                f"failure mode(s) {', '.join(fm_ids)} having it among their effects"
            ),
            source_ref=f"event:{event}",
        )
        m_graph = attach(m_graph, instance_id("G2", [event], Binding("", instance="M")), note, EdgeKind.IN_CONTEXT_OF)
        m_trace[note.id] = (f"event:{event}",) + tuple(f"fmea:{i}" for i in fm_ids)

    modules["M"] = m_graph
    trace.update(m_trace)
    for plan in plans:
        cr_graph = plan.cr.graph
        cr_trace = dict(plan.cr.trace)
        for at, hc in plan.hcs:
            link = away_goal(hc.id, hc.graph)
            cr_graph = attach(cr_graph, at, link)
            cr_trace[link.id] = hc.trace.get(hc.graph.root, ())  # type: ignore[arg-type]
        modules[plan.cr.id] = cr_graph
        trace.update(cr_trace)
        for _, hc in plan.hcs:
            modules[hc.id] = hc.graph
            trace.update(hc.trace)

    meta = {
        "config": cfg.to_data(),
        "inputs": included.digests(),
        "event_links": links,
    }
    case = SafetyCase(modules=modules, trace={k: trace[k] for k in trace if trace[k]}, meta=meta)
    problems = validate(case)
    if problems:
        raise BuildError("invalid-case", "; ".join(f"{v.code}: {v.message}" for v in problems))
    return case
