"""Countermeasure registry: design revisions, process measures and the like.

Targets are source keys into the loaded hazard analyses:

* ``cutset:<top id>:<event>+<event>...`` a minimal cutset (members sorted)
* ``fmea:<entry id>``
* ``uca:<uca id>``
* ``hazard:<hazard id>``

A target may also be a mapping ``{key, mode, post_probability,
acceptable_max}``; ``mode: reduce`` claims the cutset's rate is brought to
``post_probability`` which must not exceed ``acceptable_max``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable

from ..errors import ParseError
from .fault_tree import FaultTree, minimal_cutsets
from .fmea import FmeaEntry
from .stpa import StpaModel
from .structured import Fields, dump_document, load_document


class CountermeasureKind(str, Enum):
    DESIGN_REVISION = "DesignRevision"
    PROCESS_MEASURE = "ProcessMeasure"
    CORRECTIVE_ACTION = "CorrectiveAction"
    SAFETY_CONSTRAINT_IMPL = "SafetyConstraintImpl"


class RequirementType(str, Enum):
    FUNCTIONAL = "Functional"
    QUALITY = "Quality"
    DESIGN_CONSTRAINT = "DesignConstraint"
    PROCESS = "Process"


class TargetMode(str, Enum):
    ELIMINATE = "eliminate"
    REDUCE = "reduce"


@dataclass(frozen=True)
class Requirement:
    id: str
    text: str
    rtype: RequirementType


@dataclass(frozen=True)
class Target:
    key: str
    mode: TargetMode = TargetMode.ELIMINATE
    post_probability: float | None = None
    acceptable_max: float | None = None

    @property
    def kind(self) -> str:
        return self.key.split(":", 1)[0]

    @property
    def within_maximum(self) -> bool:
        if self.mode is TargetMode.ELIMINATE:
            return True
        return self.post_probability <= self.acceptable_max  # type: ignore[operator]


@dataclass(frozen=True)
class CountermeasureRecord:
    id: str
    kind: CountermeasureKind
    label: str
    requirements: tuple[Requirement, ...] = ()
    implementation_evidence: str | None = None
    verification_evidence: str | None = None
    targets: tuple[Target, ...] = ()

    @property
    def is_process_measure(self) -> bool:
        return self.kind is CountermeasureKind.PROCESS_MEASURE

    @property
    def target_keys(self) -> tuple[str, ...]:
        return tuple(t.key for t in self.targets)

    def target(self, key: str) -> Target | None:
        return next((t for t in self.targets if t.key == key), None)


def source_keys(
    trees: Iterable[FaultTree] = (),
    fmea: Iterable[FmeaEntry] = (),
    stpa: StpaModel | None = None,
) -> set[str]:
    """Every key a countermeasure may target, given the loaded analyses."""
    keys: set[str] = set()
    for tree in trees:
        keys.update(c.source_key for c in minimal_cutsets(tree))
    keys.update(e.source_key for e in fmea)
    if stpa is not None:
        keys.update(u.source_key for u in stpa.ucas)
        keys.update(h.source_key for h in stpa.hazards)
    return keys


def _probability(f: Fields, key: str) -> float:
    raw = f.data.get(key)
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise f.error("bad-value", f"reduce target needs numeric {key!r}") from None
    if not 0.0 <= value <= 1.0:
        raise f.error("bad-value", f"{key} {value} outside [0, 1]")
    return value


def _target(raw: Any, f: Fields) -> Target:
    if not isinstance(raw, dict):
        return Target(str(raw))
    tf = f.sub(raw, "target")
    try:
        mode = TargetMode(tf.str("mode", default="eliminate"))
    except ValueError:
        raise tf.error("bad-value", "target mode must be eliminate or reduce") from None
    if mode is TargetMode.ELIMINATE:
        return Target(tf.str("key"))
    key = tf.str("key")
    if not key.startswith("cutset:"):
        raise tf.error("bad-value", f"only cutset targets can be reduced, got {key!r}")
    return Target(key, mode, _probability(tf, "post_probability"), _probability(tf, "acceptable_max"))


def load_countermeasures(
    text: str,
    *,
    trees: Iterable[FaultTree] = (),
    fmea: Iterable[FmeaEntry] = (),
    stpa: StpaModel | None = None,
    source: str | None = None,
) -> list[CountermeasureRecord]:
    known = source_keys(trees, fmea, stpa)
    data = load_document(text, source)
    doc = Fields(data if data is not None else {}, "countermeasure registry", source, 1)
    unknown = sorted(set(doc.data) - {"countermeasures"})
    if unknown:
        raise doc.error("bad-value", f"unknown top-level key(s): {', '.join(unknown)}")

    records = []
    seen: set[str] = set()
    for raw in doc.list("countermeasures"):
        f = doc.sub(raw, "countermeasure")
        ident = f.str("id")
        if ident in seen:
            raise f.error("duplicate-id", f"countermeasure id {ident!r} used twice")
        seen.add(ident)
        try:
            kind = CountermeasureKind(f.str("kind"))
        except ValueError:
            allowed = ", ".join(k.value for k in CountermeasureKind)
            raise f.error("bad-value", f"countermeasure {ident!r} kind must be one of {allowed}") from None
        requirements = []
        for raw_req in f.list("requirements"):
            rf = f.sub(raw_req, "requirement")
            req_id = rf.str("id")
            if req_id in seen:
                raise rf.error("duplicate-id", f"requirement id {req_id!r} used twice")
            seen.add(req_id)
            try:
                rtype = RequirementType(rf.str("rtype"))
            except ValueError:
                allowed = ", ".join(r.value for r in RequirementType)
                raise rf.error("bad-value", f"requirement {req_id!r} rtype must be one of {allowed}") from None
            requirements.append(Requirement(req_id, rf.str("text"), rtype))
        targets = tuple(_target(t, f) for t in f.list("targets"))
        if not targets:
            raise f.error("no-targets", f"countermeasure {ident!r} has no targets")
        for target in targets:
            if target.key not in known:
                raise f.error("unknown-target", f"countermeasure {ident!r} targets unknown source {target.key!r}")
        record = CountermeasureRecord(
            id=ident,
            kind=kind,
            label=f.str("label"),
            requirements=tuple(requirements),
            implementation_evidence=f.opt("implementation_evidence"),
            verification_evidence=f.opt("verification_evidence"),
            targets=targets,
        )
        if record.is_process_measure and not any(r.rtype is RequirementType.PROCESS for r in requirements):
            raise f.error(
                "process-without-requirement",
                f"process measure {ident!r} needs at least one requirement of rtype Process",
            )
        records.append(record)
    return records


def countermeasures_to_data(records: Iterable[CountermeasureRecord]) -> dict[str, Any]:
    out = []
    for r in records:
        item: dict[str, Any] = {"id": r.id, "kind": r.kind.value, "label": r.label}
        item["requirements"] = [{"id": q.id, "text": q.text, "rtype": q.rtype.value} for q in r.requirements]
        if r.implementation_evidence is not None:
            item["implementation_evidence"] = r.implementation_evidence
        if r.verification_evidence is not None:
            item["verification_evidence"] = r.verification_evidence
        targets: list[Any] = []
        for t in r.targets:
            if t.mode is TargetMode.ELIMINATE:
                targets.append(t.key)
            else:
                targets.append(
                    {
                        "key": t.key,
                        "mode": t.mode.value,
                        "post_probability": t.post_probability,
                        "acceptable_max": t.acceptable_max,
                    }
                )
        item["targets"] = targets
        out.append(item)
    return {"countermeasures": out}


def serialize_countermeasures(records: Iterable[CountermeasureRecord]) -> str:
    return dump_document(countermeasures_to_data(records))
