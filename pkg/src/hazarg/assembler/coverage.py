"""Completeness and traceability checks over a built safety case."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..gsn import NodeKind, SafetyCase, undeveloped_goals
from ..ingest.fmea import high_rpn
from .build import Sources, critical_cutsets
from .config import BuildConfig

IMPLEMENTATION = "Implementation"
VERIFICATION = "Verification"


@dataclass(frozen=True)
class Uncovered:
    kind: str
    source: str
    reason: str


@dataclass(frozen=True)
class EvidenceGap:
    countermeasure: str
    missing: str


@dataclass(frozen=True)
class TraceRow:
    source: str
    requirements: tuple[str, ...]
    countermeasures: tuple[str, ...]
    goals: tuple[str, ...]
    solutions: tuple[str, ...]


@dataclass(frozen=True)
class CoverageReport:
    uncovered: tuple[Uncovered, ...] = ()
    undeveloped: tuple[str, ...] = ()
    evidence_gaps: tuple[EvidenceGap, ...] = ()
    trace_matrix: tuple[TraceRow, ...] = field(default=())

    @property
    def is_empty(self) -> bool:
        """True iff the case is fully developed and every target is covered."""
        return not (self.uncovered or self.undeveloped or self.evidence_gaps)

    def to_data(self) -> dict[str, Any]:
        return {
            "uncovered": [{"kind": u.kind, "source": u.source, "reason": u.reason} for u in self.uncovered],
            "undeveloped": list(self.undeveloped),
            "evidence_gaps": [{"countermeasure": g.countermeasure, "missing": g.missing} for g in self.evidence_gaps],
            "trace_matrix": [
                {
                    "source": r.source,
                    "requirements": list(r.requirements),
                    "countermeasures": list(r.countermeasures),
                    "goals": list(r.goals),
                    "solutions": list(r.solutions),
                }
                for r in self.trace_matrix
            ],
        }


def _row(case: SafetyCase, source: str) -> TraceRow:
    reqs: set[str] = set()
    cms: set[str] = set()
    goals: set[str] = set()
    solutions: set[str] = set()
    for node_id, keys in case.trace.items():
        if source not in keys:
            continue
        for key in keys:
            if key.startswith("req:"):
                reqs.add(key[4:])
            elif key.startswith("constraint:"):
                reqs.add(key[11:])
            elif key.startswith("cm:"):
                cms.add(key[3:])
        kind = case.node(node_id).kind
        if kind is NodeKind.GOAL:
            goals.add(node_id)
        elif kind is NodeKind.SOLUTION:
            solutions.add(node_id)
    return TraceRow(source, tuple(sorted(reqs)), tuple(sorted(cms)), tuple(sorted(goals)), tuple(sorted(solutions)))


def coverage(case: SafetyCase, sources: Sources) -> CoverageReport:
    """Report what the case leaves unargued, judged by the build-time policies."""
    cfg = BuildConfig.from_data(dict(case.meta["config"]))  # type: ignore[arg-type]
    included = sources.restricted(cfg.include)
    records = sorted(sources.countermeasures, key=lambda r: r.id)
    by_id = {r.id: r for r in records}
    uncovered: list[Uncovered] = []
    rows: list[str] = []

    def targeting(key: str) -> list:
        return [r for r in records if key in r.target_keys]

    for tree in sorted(included.trees, key=lambda t: t.top):
        for cutset in critical_cutsets(tree, cfg):
            key = cutset.source_key
            rows.append(key)
            design = [r for r in targeting(key) if not r.is_process_measure]
            if not design:
                uncovered.append(Uncovered("cutset", key, "critical path without design revision"))
                continue
            if not any(r.target(key).within_maximum for r in design):  # type: ignore[union-attr]
                uncovered.append(Uncovered("cutset", key, "reduced failure rate above acceptable maximum"))

    for entry in high_rpn(list(included.fmea), cfg.rpn_threshold):
        key = entry.source_key
        rows.append(key)
        missing = [m for m in entry.mitigations if m not in by_id]
        if missing:
            uncovered.append(Uncovered("fmea", key, f"declared mitigation {', '.join(missing)} has no record"))
        elif not entry.mitigations and not targeting(key):
            uncovered.append(Uncovered("fmea", key, "high-RPN failure mode without mitigation"))

    model = included.stpa
    if model is not None:
        for uca in model.ucas:
            rows.append(uca.source_key)
            reasons = []
            if not model.constraints_from(uca.id):
                reasons.append("no safety constraint")
            hazard_keys = [f"hazard:{h}" for h in uca.hazard_ids]
            measures = [
                r for r in records if not r.is_process_measure and (uca.source_key in r.target_keys or set(hazard_keys) & set(r.target_keys))
            ]
            if not measures:
                reasons.append("no design measure")
            if reasons:
                uncovered.append(Uncovered("uca", uca.source_key, " and ".join(reasons)))
        for hazard in model.hazards:
            if not model.constraints_from(hazard.id):
                uncovered.append(Uncovered("hazard", hazard.source_key, "no safety constraint"))

    used = sorted({key[3:] for keys in case.trace.values() for key in keys if key.startswith("cm:")})
    gaps = []
    for ident in used:
        record = by_id.get(ident)
        if record is None:
            continue
        if record.implementation_evidence is None:
            gaps.append(EvidenceGap(ident, IMPLEMENTATION))
        if record.verification_evidence is None:
            gaps.append(EvidenceGap(ident, VERIFICATION))

    return CoverageReport(
        uncovered=tuple(uncovered),
        undeveloped=tuple(undeveloped_goals(case)),
        evidence_gaps=tuple(gaps),
        trace_matrix=tuple(_row(case, key) for key in rows),
    )


@dataclass(frozen=True)
class CrossLink:
    event: str
    via: tuple[str, ...]
    failure_modes: tuple[str, ...] = ()


CUTSET_PATH = "CutsetPath"
FAILURE_MODE_EFFECT = "FailureModeEffect"


def cross_links(case: SafetyCase) -> list[CrossLink]:
    """Per FTA event, the direction(s) from which the case argues it."""
    links = case.meta.get("event_links", {}) or {}
    out = []
    for event in sorted(links):  # type: ignore[union-attr]
        fms = tuple(links[event])  # type: ignore[index]
        via = (CUTSET_PATH, FAILURE_MODE_EFFECT) if fms else (CUTSET_PATH,)
        out.append(CrossLink(event, via, fms))
    return out
