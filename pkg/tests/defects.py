"""Seeded defect fixtures: each one must be rejected with a designated code.

Every entry maps a name to (expected code, probe). The probe returns the
codes it observed: violation codes for graph-level defects, or the code of
the raised error for defects caught while parsing or instantiating.
"""

from __future__ import annotations

from typing import Callable

import yaml

from hazarg.errors import HazargError
from hazarg.fixtures import TDCS_CM, TDCS_STPA, tdcs_dir, tdcs_sources
from hazarg.gsn import EdgeKind, GsnEdge, GsnGraph, GsnNode, NodeKind, SafetyCase, validate
from hazarg.ingest import load_countermeasures, parse_fmea, parse_stpa
from hazarg.ingest.fmea import COLUMNS
from hazarg.patterns import Binding, builtin, instantiate, refine

SB = EdgeKind.SUPPORTED_BY
IC = EdgeKind.IN_CONTEXT_OF


def _node(ident: str, kind: NodeKind = NodeKind.GOAL, target: tuple[str, str] | None = None) -> GsnNode:
    return GsnNode(ident, kind, f"{kind.value} {ident}", target=target)


def _graph(nodes: list[GsnNode], edges: list[tuple[str, str, EdgeKind]]) -> GsnGraph:
    # Raw construction: defects must get past the checked builders to be seen by validate.
    return GsnGraph(nodes={n.id: n for n in nodes}, edges=tuple(GsnEdge(*e) for e in edges), root=nodes[0].id)


def _codes(case: SafetyCase) -> list[str]:
    return sorted({v.code for v in validate(case)})


def _raised(probe: Callable[[], object]) -> list[str]:
    try:
        probe()
    except HazargError as exc:
        return [exc.code]
    return []


def cycle() -> list[str]:
    g = _graph([_node("G1"), _node("G2"), _node("G3")], [("G1", "G2", SB), ("G2", "G3", SB), ("G3", "G2", SB)])
    return _codes(SafetyCase({"M": g}))


def dangling_away_goal() -> list[str]:
    g = _graph([_node("G1"), _node("AG", NodeKind.AWAY_GOAL, ("CR-X", "G2"))], [("G1", "AG", SB)])
    return _codes(SafetyCase({"M": g}))


def solution_with_child() -> list[str]:
    g = _graph([_node("G1"), _node("Sn1", NodeKind.SOLUTION), _node("G2")], [("G1", "Sn1", SB), ("Sn1", "G2", SB)])
    return _codes(SafetyCase({"M": g}))


def orphan_context() -> list[str]:
    g = _graph([_node("G1"), _node("Sn1", NodeKind.SOLUTION), _node("C1", NodeKind.CONTEXT)], [("G1", "Sn1", SB)])
    return _codes(SafetyCase({"M": g}))


def duplicate_id() -> list[str]:
    m = _graph([_node("G1"), _node("Sn1", NodeKind.SOLUTION)], [("G1", "Sn1", SB)])
    x = _graph([_node("G9"), _node("Sn1", NodeKind.SOLUTION)], [("G9", "Sn1", SB)])
    return _codes(SafetyCase({"M": m, "X": x}))


def missing_refinement_binding() -> list[str]:
    return _raised(lambda: refine(builtin("HC-GEN"), {"CT": "mitigating failure mode", "AT": "FMEA"}))


def choice_without_branch() -> list[str]:
    binding = Binding("CR-FMEA", instantiation_values={"FM": "fm"}, choice_selections={"dr-or-process": frozenset()})
    return _raised(lambda: instantiate(builtin("CR-FMEA"), binding))


def unresolved_countermeasure_target() -> list[str]:
    data = yaml.safe_load((tdcs_dir() / TDCS_CM).read_text())
    data["countermeasures"][0]["targets"].append("fmea:FM9")
    s = tdcs_sources()
    return _raised(lambda: load_countermeasures(yaml.safe_dump(data), trees=s.trees, fmea=s.fmea))


def rpn_rating_out_of_range() -> list[str]:
    text = ",".join(COLUMNS) + "\nFM1,item,mode,effect,cause,11,4,5,\n"
    return _raised(lambda: parse_fmea(text))


def uca_without_hazard() -> list[str]:
    data = yaml.safe_load((tdcs_dir() / TDCS_STPA).read_text())
    data["ucas"][0]["hazards"] = []
    return _raised(lambda: parse_stpa(yaml.safe_dump(data)))


DEFECTS: dict[str, tuple[str, Callable[[], list[str]]]] = {
    "cycle": ("Cycle", cycle),
    "dangling away-goal": ("UnresolvedReference", dangling_away_goal),
    "solution with child": ("SolutionWithChild", solution_with_child),
    "orphan context": ("UnreachableNode", orphan_context),
    "duplicate id": ("DuplicateId", duplicate_id),
    "missing refinement binding": ("unbound-param", missing_refinement_binding),
    "choice with 0 branches": ("choice-violation", choice_without_branch),
    "unresolved countermeasure target": ("unknown-target", unresolved_countermeasure_target),
    "RPN rating out of range": ("bad-rating", rpn_rating_out_of_range),
    "UCA without hazard": ("uca-without-hazard", uca_without_hazard),
}
