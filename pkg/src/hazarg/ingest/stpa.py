"""STPA models: accidents, hazards, control structure, UCAs, constraints."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ..errors import ParseError
from .structured import Fields, dump_document, load_document


class GuideWord(str, Enum):
    NOT_PROVIDED = "NotProvided"
    PROVIDED_CAUSES_HAZARD = "ProvidedCausesHazard"
    WRONG_TIMING_OR_ORDER = "WrongTimingOrOrder"
    STOPPED_TOO_SOON_OR_APPLIED_TOO_LONG = "StoppedTooSoonOrAppliedTooLong"


class ConstraintKind(str, Enum):
    SCA = "SCA"  # derived from an unsafe control action
    SCH = "SCH"  # derived from a hazard


@dataclass(frozen=True)
class Accident:
    id: str
    label: str


@dataclass(frozen=True)
class Hazard:
    id: str
    label: str
    accident_ids: tuple[str, ...]

    @property
    def source_key(self) -> str:
        return f"hazard:{self.id}"


@dataclass(frozen=True)
class Component:
    id: str
    label: str


@dataclass(frozen=True)
class Link:
    """A control action or feedback link between two components."""

    id: str
    label: str
    source: str
    target: str


@dataclass(frozen=True)
class ControlStructure:
    controllers: tuple[Component, ...] = ()
    controlled_processes: tuple[Component, ...] = ()
    control_actions: tuple[Link, ...] = ()
    feedback: tuple[Link, ...] = ()


@dataclass(frozen=True)
class Uca:
    id: str
    control_action_id: str
    guide_word: GuideWord
    hazard_ids: tuple[str, ...]
    text: str

    @property
    def source_key(self) -> str:
        return f"uca:{self.id}"


@dataclass(frozen=True)
class CausalFactor:
    id: str
    uca_id: str
    text: str


@dataclass(frozen=True)
class Constraint:
    id: str
    kind: ConstraintKind
    derived_from: str
    text: str


@dataclass(frozen=True)
class StpaModel:
    accidents: tuple[Accident, ...] = ()
    hazards: tuple[Hazard, ...] = ()
    control_structure: ControlStructure = field(default_factory=ControlStructure)
    ucas: tuple[Uca, ...] = ()
    causal_factors: tuple[CausalFactor, ...] = ()
    constraints: tuple[Constraint, ...] = ()

    def accident(self, accident_id: str) -> Accident:
        return next(a for a in self.accidents if a.id == accident_id)

    def hazard(self, hazard_id: str) -> Hazard:
        return next(h for h in self.hazards if h.id == hazard_id)

    def uca(self, uca_id: str) -> Uca:
        return next(u for u in self.ucas if u.id == uca_id)

    def control_action(self, action_id: str) -> Link:
        return next(a for a in self.control_structure.control_actions if a.id == action_id)

    def ucas_of(self, hazard_id: str) -> list[Uca]:
        return [u for u in self.ucas if hazard_id in u.hazard_ids]

    def factors_of(self, uca_id: str) -> list[CausalFactor]:
        return [f for f in self.causal_factors if f.uca_id == uca_id]

    def constraints_from(self, element_id: str) -> list[Constraint]:
        return [c for c in self.constraints if c.derived_from == element_id]


TOP_KEYS = ("accidents", "hazards", "control_structure", "ucas", "causal_factors", "constraints")


def parse_stpa(text: str, source: str | None = None) -> StpaModel:
    data = load_document(text, source)
    doc = Fields(data if data is not None else {}, "STPA document", source, 1)
    unknown = sorted(set(doc.data) - set(TOP_KEYS))
    if unknown:
        raise doc.error("bad-value", f"unknown top-level key(s): {', '.join(unknown)}")

    ids: set[str] = set()

    def fresh(f: Fields) -> str:
        ident = f.str("id")
        if ident in ids:
            raise f.error("duplicate-id", f"id {ident!r} used twice")
        ids.add(ident)
        return ident

    accidents = []
    for raw in doc.list("accidents"):
        f = doc.sub(raw, "accident")
        accidents.append(Accident(fresh(f), f.str("label")))
    accident_ids = {a.id for a in accidents}

    hazards = []
    for raw in doc.list("hazards"):
        f = doc.sub(raw, "hazard")
        hazard = Hazard(fresh(f), f.str("label"), f.strs("accidents"))
        if not hazard.accident_ids:
            raise f.error("hazard-without-accident", f"hazard {hazard.id!r} links no accident")
        for a in hazard.accident_ids:
            if a not in accident_ids:
                raise f.error("dangling-reference", f"hazard {hazard.id!r} links unknown accident {a!r}")
        hazards.append(hazard)
    hazard_ids = {h.id for h in hazards}

    cs = doc.sub(doc.data.get("control_structure") or {}, "control_structure")

    def components(key: str) -> tuple[Component, ...]:
        out = []
        for raw in cs.list(key):
            f = cs.sub(raw, key)
            out.append(Component(fresh(f), f.str("label")))
        return tuple(out)

    controllers = components("controllers")
    processes = components("controlled_processes")
    component_ids = {c.id for c in controllers + processes}

    def links(key: str) -> tuple[Link, ...]:
        out = []
        for raw in cs.list(key):
            f = cs.sub(raw, key)
            link = Link(fresh(f), f.str("label"), f.str("source"), f.str("target"))
            for end in (link.source, link.target):
                if end not in component_ids:
                    raise f.error("dangling-reference", f"{key} {link.id!r} references unknown component {end!r}")
            out.append(link)
        return tuple(out)

    structure = ControlStructure(controllers, processes, links("control_actions"), links("feedback"))
    action_ids = {a.id for a in structure.control_actions}

    ucas = []
    for raw in doc.list("ucas"):
        f = doc.sub(raw, "uca")
        ident = fresh(f)
        try:
            guide = GuideWord(f.str("guide_word"))
        except ValueError:
            allowed = ", ".join(g.value for g in GuideWord)
            raise f.error("bad-value", f"UCA {ident!r} guide word must be one of {allowed}") from None
        uca = Uca(ident, f.str("control_action"), guide, f.strs("hazards"), f.str("text"))
        if uca.control_action_id not in action_ids:
            raise f.error("dangling-reference", f"UCA {ident!r} references unknown control action {uca.control_action_id!r}")
        if not uca.hazard_ids:
            raise f.error("uca-without-hazard", f"UCA {ident!r} links no hazard")
        for h in uca.hazard_ids:
            if h not in hazard_ids:
                raise f.error("dangling-reference", f"UCA {ident!r} links unknown hazard {h!r}")
        ucas.append(uca)
    uca_ids = {u.id for u in ucas}

    factors = []
    for raw in doc.list("causal_factors"):
        f = doc.sub(raw, "causal factor")
        factor = CausalFactor(fresh(f), f.str("uca"), f.str("text"))
        if factor.uca_id not in uca_ids:
            raise f.error("dangling-reference", f"causal factor {factor.id!r} references unknown UCA {factor.uca_id!r}")
        factors.append(factor)

    constraints = []
    for raw in doc.list("constraints"):
        f = doc.sub(raw, "constraint")
        ident = fresh(f)
        try:
            kind = ConstraintKind(f.str("kind"))
        except ValueError:
            raise f.error("bad-value", f"constraint {ident!r} kind must be SCA or SCH") from None
        origin = f.str("derived_from")
        expected, other = (uca_ids, hazard_ids) if kind is ConstraintKind.SCA else (hazard_ids, uca_ids)
        if origin not in expected:
            code = "constraint-kind-mismatch" if origin in other else "dangling-reference"
            wanted = "an unsafe control action" if kind is ConstraintKind.SCA else "a hazard"
            raise f.error(code, f"{kind.value} constraint {ident!r} must derive from {wanted}, got {origin!r}")
        constraints.append(Constraint(ident, kind, origin, f.str("text")))

    return StpaModel(
        accidents=tuple(accidents),
        hazards=tuple(hazards),
        control_structure=structure,
        ucas=tuple(ucas),
        causal_factors=tuple(factors),
        constraints=tuple(constraints),
    )


def stpa_to_data(model: StpaModel) -> dict[str, Any]:
    cs = model.control_structure
    return {
        "accidents": [{"id": a.id, "label": a.label} for a in model.accidents],
        "hazards": [{"id": h.id, "label": h.label, "accidents": list(h.accident_ids)} for h in model.hazards],
        "control_structure": {
            "controllers": [{"id": c.id, "label": c.label} for c in cs.controllers],
            "controlled_processes": [{"id": c.id, "label": c.label} for c in cs.controlled_processes],
            "control_actions": [
                {"id": a.id, "label": a.label, "source": a.source, "target": a.target} for a in cs.control_actions
            ],
            "feedback": [{"id": a.id, "label": a.label, "source": a.source, "target": a.target} for a in cs.feedback],
        },
        "ucas": [
            {
                "id": u.id,
                "control_action": u.control_action_id,
                "guide_word": u.guide_word.value,
                "hazards": list(u.hazard_ids),
                "text": u.text,
            }
            for u in model.ucas
        ],
        "causal_factors": [{"id": f.id, "uca": f.uca_id, "text": f.text} for f in model.causal_factors],
        "constraints": [
            {"id": c.id, "kind": c.kind.value, "derived_from": c.derived_from, "text": c.text}
            for c in model.constraints
        ],
    }


def serialize_stpa(model: StpaModel) -> str:
    return dump_document(stpa_to_data(model))
